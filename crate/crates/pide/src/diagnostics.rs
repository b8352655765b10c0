//! Convergence-to-ergodic-profile instrumentation and the Hamiltonian
//! assumption audits. The audits evaluate H(p) = |p|^m in closed form; they
//! are statements about the Hamiltonian function, not its discretization.

use crate::cauchy::CauchyRun;
use crate::ergodic::ErgodicPair;
use crate::error::{Error, Result};
use crate::levy::AuditReport;
use crate::torus::{max_value, min_value, oscillation};
use std::io::Write;

/// Series of m(t) = max(u(.,t) - lambda t - v), its min counterpart, and the
/// oscillation of the deviation, per snapshot.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    pub m_series: Vec<f64>,
    pub min_series: Vec<f64>,
    pub osc_series: Vec<f64>,
    /// m at the final snapshot.
    pub m_bar: f64,
    /// Largest positive jump of m between consecutive snapshots.
    pub monotone_violation: f64,
}

pub fn convergence_report(run: &CauchyRun, pair: &ErgodicPair) -> Result<ConvergenceReport> {
    if run
        .snapshots
        .first()
        .map(|(_, f)| f.grid() != pair.v.grid())
        .unwrap_or(true)
    {
        return Err(Error::GridMismatch);
    }
    let mut times = Vec::with_capacity(run.snapshots.len());
    let mut m_series = Vec::with_capacity(run.snapshots.len());
    let mut min_series = Vec::with_capacity(run.snapshots.len());
    let mut osc_series = Vec::with_capacity(run.snapshots.len());
    for (t, field) in &run.snapshots {
        let mut dev = field.clone();
        dev.add_constant(-pair.lambda * t);
        dev.axpy(-1.0, &pair.v);
        times.push(*t);
        m_series.push(max_value(&dev));
        min_series.push(min_value(&dev));
        osc_series.push(oscillation(&dev));
    }
    let monotone_violation = m_series
        .windows(2)
        .map(|w| (w[1] - w[0]).max(0.0))
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        m_bar: *m_series.last().unwrap_or(&0.0),
        times,
        m_series,
        min_series,
        osc_series,
        monotone_violation,
    })
}

impl ConvergenceReport {
    /// CSV emission: `t,m,min,osc`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,m,min,osc")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.m_series[i], self.min_series[i], self.osc_series[i]
            )?;
        }
        Ok(())
    }
}

fn h_norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sublinearity audit: (1/k) H(k p) = k^{m-1} |p|^m across the schedule.
/// For m = 1 the limit is |p| and the sequence is constant; for m < 1 it
/// tends to 0; for m > 1 it diverges and the audit correctly fails.
///
/// `computed_values` holds, per sample p, the value at the largest k.
pub fn audit_ha(m: f64, sample_p: &[Vec<f64>], k_schedule: &[f64]) -> Result<AuditReport> {
    if sample_p.is_empty() {
        return Err(Error::TooFew {
            what: "gradient samples",
            need: 1,
            got: 0,
        });
    }
    if k_schedule.len() < 2 || k_schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("k schedule must be increasing".into()));
    }
    let mut computed = Vec::new();
    let mut pass = true;
    for p in sample_p {
        let pn = h_norm(p);
        if pn == 0.0 {
            return Err(Error::Precondition("samples must be nonzero".into()));
        }
        let vals: Vec<f64> = k_schedule
            .iter()
            .map(|&k| k.powf(m - 1.0) * pn.powf(m))
            .collect();
        let last = *vals.last().unwrap();
        let prev = vals[vals.len() - 2];
        computed.push(last);
        let stabilized = if m < 1.0 {
            // limit 0: the tail must have decayed
            last <= 1e-3 * pn.powf(m).max(1.0) || last < prev
        } else {
            (last - prev).abs() <= 1e-3 * last.abs().max(1e-300)
        };
        pass &= stabilized && last.is_finite() && (m <= 1.0);
    }
    Ok(AuditReport {
        assumption: "H-a".into(),
        parameters: serde_json::json!({ "m": m, "k_schedule": k_schedule }),
        computed_values: computed,
        pass,
    })
}

/// Superlinearity audit: for H(p) = |p|^m the quotient
/// (mu H(p/mu) - H(p)) / ((1-mu)|p|^m) equals (mu^{1-m} - 1)/(1 - mu),
/// independent of p. The fitted eta is its minimum over the sampled box;
/// pass iff eta >= (m-1)(1 - 1e-9).
pub fn audit_hb(m: f64, mu0: f64, r0: f64, samples: usize) -> Result<AuditReport> {
    if m <= 1.0 {
        return Err(Error::Precondition(format!(
            "audit_hb needs m > 1, got {m}"
        )));
    }
    if !(mu0 > 0.0 && mu0 < 1.0) || r0 <= 0.0 || samples < 2 {
        return Err(Error::Precondition("bad sampling box".into()));
    }
    let mut eta = f64::INFINITY;
    for i in 0..samples {
        let mu = mu0 + (1.0 - mu0) * (i as f64 + 0.5) / samples as f64;
        for j in 0..samples {
            let pn = r0 + 9.0 * r0 * j as f64 / (samples - 1) as f64;
            let lhs = mu * (pn / mu).powf(m) - pn.powf(m);
            let ratio = lhs / ((1.0 - mu) * pn.powf(m));
            eta = eta.min(ratio);
        }
    }
    let pass = eta >= (m - 1.0) * (1.0 - 1e-9);
    Ok(AuditReport {
        assumption: "H-b".into(),
        parameters: serde_json::json!({ "m": m, "mu0": mu0, "r0": r0, "samples": samples }),
        computed_values: vec![eta],
        pass,
    })
}

/// Rescaling inequality audit with eta_hat = 1/2:
/// c^{m-1}|p|^m - |p|^m >= eta_hat c^{m-1}|p|^m - 1/eta_hat for c >= 1,
/// including small |p| below r0. Reports the worst margin (>= 0 means pass).
pub fn audit_prop_h(m: f64, c_schedule: &[f64], samples: usize) -> Result<AuditReport> {
    if m <= 1.0 {
        return Err(Error::Precondition(format!(
            "audit_prop_h needs m > 1, got {m}"
        )));
    }
    if c_schedule.iter().any(|&c| c < 1.0) {
        return Err(Error::Precondition("c schedule must be >= 1".into()));
    }
    let eta_hat: f64 = 0.5;
    let mut worst = f64::INFINITY;
    for &c in c_schedule {
        for j in 0..=samples {
            // |p| up to eta_hat^{-2/m}: the additive slack 1/eta_hat carries
            // the inequality at c = 1 exactly on this range, and the
            // multiplicative part takes over for c > 1
            let pn = eta_hat.powf(-2.0 / m) * j as f64 / samples as f64;
            let lhs = c.powf(m - 1.0) * pn.powf(m) - pn.powf(m);
            let rhs = eta_hat * c.powf(m - 1.0) * pn.powf(m) - 1.0 / eta_hat;
            worst = worst.min(lhs - rhs);
        }
    }
    Ok(AuditReport {
        assumption: "propH".into(),
        parameters: serde_json::json!({ "m": m, "c_schedule": c_schedule, "eta_hat": eta_hat }),
        computed_values: vec![worst],
        // zero margin is attained at c = 1, |p|^m = 1/eta_hat^2; leave
        // headroom for roundoff there
        pass: worst >= -1e-9,
    })
}
