//! Qubit-scale end-to-end verification: one run that exercises every
//! tracked inequality and fills the complete scoreboard.

use std::sync::Arc;

use crate::ff_amplify::{self, build_amplified, ff_set_at, run_rm_amplified};
use crate::qsa::{self, ObjectiveFunction};
use crate::report::{anchors, Scoreboard};
use crate::rm_engine::{self, record_run, DistPolicy, RmMode};
use crate::spectral;
use crate::{ham_path::HamiltonianPath, Result};

/// Record the length-bound chain and the pointwise rate bound from one
/// grid report.
pub fn record_bounds(scoreboard: &mut Scoreboard, report: &spectral::PathLengthReport) {
    let l = report.length;
    let star = report.bound_improved;
    scoreboard.record(anchors::PATH_LENGTH_BOUND, l, star, l <= star + 1e-6);
    if let Some(lin) = report.bound_linear {
        scoreboard.record(anchors::PATH_LENGTH_BOUND, star, lin, star <= lin + 1e-6);
    }
    if let Some(ff) = report.bound_ff {
        scoreboard.record(anchors::PATH_LENGTH_BOUND, star, ff, star <= ff + 1e-6);
    }
    scoreboard.record(
        anchors::PATH_LENGTH_BOUND,
        star,
        report.bound_general,
        star <= report.bound_general + 1e-6,
    );
    for p in &report.samples {
        let lhs = p.rate_norm * p.rate_norm;
        scoreboard.record(anchors::LOCAL_RATE_BOUND, lhs, p.integrand, lhs <= p.integrand + 1e-8);
    }
}

/// Non-uniform rotating-projector frustration-free path used by the
/// verification runs: smoothstep profile `θ(s) = (π/2)·s²(3−2s)`, so the
/// rotation rate vanishes at both ends and peaks mid-sweep.
pub fn eased_rotating_projector() -> HamiltonianPath {
    crate::families::rotating_projector_path(|s| {
        std::f64::consts::FRAC_PI_2 * s * s * (3.0 - 2.0 * s)
    })
}

/// Run the full qubit-scale verification and return the populated
/// scoreboard (all twelve anchors).
pub fn full_verification(seed: u64) -> Result<Scoreboard> {
    let mut sb = Scoreboard::new();
    let policy = DistPolicy::gaussian_third();

    // path-length chain and pointwise rate bound on the workhorse path
    let qubit = crate::families::qubit_x_to_z();
    let report = spectral::compute_report(&qubit, 1001)?;
    record_bounds(&mut sb, &report);

    // randomization method on the qubit path
    let rm = rm_engine::run_rm(&qubit, 0.1, &policy, RmMode::Exact, seed)?;
    record_run(&mut sb, &rm);

    // frustration-free chain, gap amplification, and amplified-run cost
    let ff_path = eased_rotating_projector();
    let ff_report = spectral::compute_report(&ff_path, 401)?;
    record_bounds(&mut sb, &ff_report);
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        let set = ff_set_at(&ff_path, s)?;
        let amp = build_amplified(&set)?;
        let bound = (set.gap * set.pi_norm).sqrt();
        sb.record(
            anchors::AMPLIFIED_GAP,
            bound,
            amp.delta_prime,
            amp.delta_prime >= bound - 1e-8,
        );
    }
    let amp_run = run_rm_amplified(&ff_path, 0.1, &policy, 401)?;
    let amp_bound =
        ff_amplify::rm_cost_amplified(&ff_path, 0.1, 401, policy.step_cost_constant())?;
    sb.record(
        anchors::AMPLIFIED_RM_COST,
        amp_run.total_cost,
        amp_bound,
        amp_run.total_cost <= amp_bound * (1.0 + 1e-6),
    );

    // measurement-based traversal formula against the amplified RM cost
    // in the small-gap regime
    let small_gap_path = crate::families::scaled_ff_path(0.01, seed ^ 0x5f5f);
    let kappa = policy.step_cost_constant();
    let fixed = ff_amplify::fixed_point_cost(&small_gap_path, 0.1, 201, kappa)?;
    let amplified = ff_amplify::rm_cost_amplified(&small_gap_path, 0.1, 201, kappa)?;
    sb.record(anchors::FIXED_POINT_COST, fixed, amplified, fixed <= amplified);

    // annealing identities and cost comparison on the single-spin model
    let obj = ObjectiveFunction::new(vec![-0.5, 0.5])?;
    let beta_q = qsa::beta_final(&obj, 0.1)?;
    for k in 0..=20 {
        let beta = beta_q * k as f64 / 20.0;
        let id = qsa::rate_identity_check(&obj, beta, 1e-4)?;
        sb.record(
            anchors::GIBBS_RATE_IDENTITY,
            id.rel_err,
            1e-6,
            id.rel_err <= 1e-6,
        );
    }
    let gap_fn = |beta: f64| qsa::metropolis_gap(&obj, beta).expect("two-state chain");
    let (t_qsa, t_old) = qsa::qsa_costs(&obj, 0.1, &gap_fn, 1.0, 33)?;
    sb.record(anchors::QSA_COST, t_qsa, t_old, t_qsa <= t_old);

    // the annealing path run end to end through the RM
    let gibbs_path = qsa::gibbs_rm_path(&obj, beta_q, Arc::new(|_| 1.0))?;
    let gibbs_rm = rm_engine::run_rm(&gibbs_path, 0.1, &policy, RmMode::Exact, seed ^ 0xa5a5)?;
    record_run(&mut sb, &gibbs_rm);

    Ok(sb)
}
