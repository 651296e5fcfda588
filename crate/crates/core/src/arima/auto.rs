//! Stepwise AIC search: differencing order from successive KPSS tests,
//! then hill-climbing over (p, q, drift).

use std::collections::HashMap;

use super::{difference, fit_arima, kpss_test, ArimaError, ArimaFit, ArimaSpec, MAX_D, MAX_P, MAX_Q};

const MAX_STEPS: usize = 100;

/// Smallest `d` whose differenced series passes KPSS at 5% (capped at 2).
pub fn select_differencing(k: &[f64]) -> Result<usize, ArimaError> {
    for d in 0..MAX_D {
        let w = difference(k, d);
        if w.len() < 10 || !kpss_test(&w)?.reject_stationarity {
            return Ok(d);
        }
    }
    Ok(MAX_D)
}

pub fn auto_select(k: &[f64]) -> Result<ArimaFit, ArimaError> {
    if k.len() < 10 {
        return Err(ArimaError::InsufficientData { needed: 10, got: k.len() });
    }
    let d = select_differencing(k)?;
    let drift_allowed = d <= 1;

    let mut tried: HashMap<(usize, usize, bool), Result<ArimaFit, ArimaError>> = HashMap::new();
    let mut attempt = |p: usize, q: usize, drift: bool| -> Option<ArimaFit> {
        if p > MAX_P || q > MAX_Q || (drift && !drift_allowed) || k.len() < d + p + q + 2 {
            return None;
        }
        tried
            .entry((p, q, drift))
            .or_insert_with(|| fit_arima(k, ArimaSpec::new(p, d, q, drift)))
            .as_ref()
            .ok()
            .cloned()
    };

    let better = |cand: &ArimaFit, cur: &Option<ArimaFit>| cur.as_ref().is_none_or(|c| cand.aic < c.aic);

    let mut best: Option<ArimaFit> = None;
    for (p, q) in [(2, 2), (0, 0), (1, 0), (0, 1)] {
        if let Some(f) = attempt(p, q, drift_allowed) {
            if better(&f, &best) {
                best = Some(f);
            }
        }
    }

    for _ in 0..MAX_STEPS {
        let Some(cur) = best.clone() else { break };
        let (p, q, drift) = (cur.spec.p, cur.spec.q, cur.spec.with_drift);
        let mut neighbours = vec![(p + 1, q, drift), (p, q + 1, drift)];
        if p > 0 {
            neighbours.push((p - 1, q, drift));
        }
        if q > 0 {
            neighbours.push((p, q - 1, drift));
        }
        if drift_allowed {
            neighbours.push((p, q, !drift));
        }
        let mut step: Option<ArimaFit> = None;
        for (np, nq, nd) in neighbours {
            if let Some(f) = attempt(np, nq, nd) {
                if f.aic < cur.aic && better(&f, &step) {
                    step = Some(f);
                }
            }
        }
        match step {
            Some(f) => best = Some(f),
            None => break,
        }
    }

    best.ok_or_else(|| {
        let mut attempts: Vec<String> = tried
            .iter()
            .map(|((p, q, drift), r)| {
                let spec = ArimaSpec::new(*p, d, *q, *drift);
                match r {
                    Ok(_) => format!("{spec}: ok"),
                    Err(e) => format!("{spec}: {e}"),
                }
            })
            .collect();
        attempts.sort();
        ArimaError::SelectionFailed { attempts }
    })
}
