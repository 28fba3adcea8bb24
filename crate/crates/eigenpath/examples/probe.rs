use eigenpath::spectral;
fn main() {
    let path = eigenpath::verify::eased_rotating_projector();
    let report = spectral::compute_report(&path, 401).unwrap();
    for p in &report.samples {
        let lhs = p.rate_norm * p.rate_norm;
        if lhs > p.integrand + 1e-8 || p.integrand < -1e-9 {
            println!("s={:.6} rate2={:.3e} integrand={:.3e} ddh_norm={:.3e} gap={:.3e}", p.s, lhs, p.integrand, p.ddh_norm, p.gap);
        }
    }
    // breakdown at the worst point
    for s in [0.0, 0.0025, 0.005, 0.9975, 1.0] {
        let sd = spectral::decompose_path(&path, s).unwrap();
        let ddh = path.eval_ddh(s).unwrap();
        let expect = ddh.expectation(&sd.ground_state());
        let dde = spectral::energy_second_derivative(&path, s).unwrap();
        println!("s={s}: <ddH>={:.4e} ddE={:.4e}", expect, dde);
    }
    let q = eigenpath::families::qubit_x_to_z();
    let rq = spectral::compute_report(&q, 1001).unwrap();
    for p in &rq.samples {
        let lhs = p.rate_norm * p.rate_norm;
        if lhs > p.integrand + 1e-8 {
            println!("QUBIT s={:.6} rate2={:.6e} integrand={:.6e}", p.s, lhs, p.integrand);
        }
    }
}
