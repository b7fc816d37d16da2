//! Single-chain convergence diagnostics.

/// Split-half potential scale reduction factor of a scalar trace. The trace
/// is split into two halves which are treated as independent chains. Returns
/// 1.0 for constant traces.
pub fn split_rhat(trace: &[f64]) -> f64 {
    let n = trace.len() / 2;
    if n < 2 {
        return f64::NAN;
    }
    let first = &trace[..n];
    let second = &trace[trace.len() - n..];
    let (m1, v1) = mean_var(first);
    let (m2, v2) = mean_var(second);
    let w = 0.5 * (v1 + v2);
    if w <= 0.0 {
        return 1.0;
    }
    let grand = 0.5 * (m1 + m2);
    let b = n as f64 * ((m1 - grand).powi(2) + (m2 - grand).powi(2));
    let var_plus = (n as f64 - 1.0) / n as f64 * w + b / n as f64;
    (var_plus / w).sqrt()
}

/// Effective sample size via Geyer's initial positive sequence: lag
/// autocorrelations are summed in pairs until a pair sum turns negative.
pub fn effective_sample_size(trace: &[f64]) -> f64 {
    let n = trace.len();
    if n < 4 {
        return n as f64;
    }
    let (mean, var) = mean_var(trace);
    if var <= 0.0 {
        return n as f64;
    }
    let max_lag = n - 2;
    let rho = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..n - lag {
            acc += (trace[i] - mean) * (trace[i + lag] - mean);
        }
        acc / (n as f64 * var)
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 <= max_lag {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau).min(n as f64)
}

/// Integrated autocorrelation time implied by [`effective_sample_size`].
pub fn autocorrelation_time(trace: &[f64]) -> f64 {
    let ess = effective_sample_size(trace);
    if ess > 0.0 {
        trace.len() as f64 / ess
    } else {
        f64::INFINITY
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
