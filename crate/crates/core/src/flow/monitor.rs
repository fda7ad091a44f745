use super::state::MonitorSample;

/// Verdicts of the a priori laws on a monitor history.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub samples: usize,
    pub slack: f64,
    pub times_increasing: bool,
    /// Largest increase of `sup u_t` between samples.
    pub sup_ut_increase: f64,
    /// Largest decrease of `inf u_t` between samples.
    pub inf_ut_decrease: f64,
    /// Monotone envelopes; only asserted when `ψ_t = 0`.
    pub monotone: Option<bool>,
    /// `max_t |u_t| − (sup_{t=0}|u_t| + |rate|·t)`.
    pub rate_excess: f64,
    pub rate_bound: bool,
    /// `max_t osc u − osc u(0)`.
    pub osc_growth: f64,
    pub osc_budget: f64,
    pub osc_bound: bool,
    /// `|Δ osc u| / Δt` over the final sample interval.
    pub osc_final_rate: f64,
    /// `max_t sup|u| − (sup|u₀| + sup|u_t|·t)`.
    pub c0_excess: f64,
    pub c0_bound: bool,
}

impl MonitorReport {
    pub fn passes(&self) -> bool {
        self.times_increasing && self.monotone.unwrap_or(true) && self.rate_bound && self.osc_bound && self.c0_bound
    }
}

/// `1e-8 + 10·Δt·L`, with `L` the steepest observed slope of the `u_t`
/// envelopes.
pub fn default_slack(history: &[MonitorSample]) -> f64 {
    let dt = history.iter().map(|s| s.dt).fold(0.0, f64::max);
    let lip = history
        .windows(2)
        .filter(|w| w[1].t > w[0].t)
        .map(|w| {
            let d = (w[1].sup_ut - w[0].sup_ut).abs().max((w[1].inf_ut - w[0].inf_ut).abs());
            d / (w[1].t - w[0].t)
        })
        .fold(0.0, f64::max);
    1e-8 + 10.0 * dt * lip
}

pub fn monitor_checks(history: &[MonitorSample], rate: f64, slack: f64, osc_budget: f64) -> MonitorReport {
    let mut r = MonitorReport {
        samples: history.len(),
        slack,
        times_increasing: history.windows(2).all(|w| w[1].t > w[0].t),
        sup_ut_increase: 0.0,
        inf_ut_decrease: 0.0,
        monotone: None,
        rate_excess: f64::NEG_INFINITY,
        rate_bound: true,
        osc_growth: 0.0,
        osc_budget,
        osc_bound: true,
        osc_final_rate: 0.0,
        c0_excess: f64::NEG_INFINITY,
        c0_bound: true,
    };
    let Some(first) = history.first() else {
        return r;
    };
    for w in history.windows(2) {
        r.sup_ut_increase = r.sup_ut_increase.max(w[1].sup_ut - w[0].sup_ut);
        r.inf_ut_decrease = r.inf_ut_decrease.max(w[0].inf_ut - w[1].inf_ut);
    }
    if rate == 0.0 {
        r.monotone = Some(r.sup_ut_increase <= slack && r.inf_ut_decrease <= slack);
    }
    let ut0 = first.sup_ut.abs().max(first.inf_ut.abs());
    for s in history {
        let ut = s.sup_ut.abs().max(s.inf_ut.abs());
        r.rate_excess = r.rate_excess.max(ut - (ut0 + rate.abs() * s.t));
        r.osc_growth = r.osc_growth.max(s.osc_u - first.osc_u);
        r.c0_excess = r.c0_excess.max(s.sup_abs_u - (first.sup_abs_u + s.max_abs_ut * s.t));
    }
    r.rate_bound = r.rate_excess <= slack;
    r.osc_bound = r.osc_growth <= osc_budget;
    r.c0_bound = r.c0_excess <= slack;
    if let [.., a, b] = history {
        if b.t > a.t {
            r.osc_final_rate = (b.osc_u - a.osc_u).abs() / (b.t - a.t);
        }
    }
    r
}
