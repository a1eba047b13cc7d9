//! Minimal end-to-end run: probe the landscape with the hybrid method and
//! report the best tessellation found.

use pcvt::*;
use rand::SeedableRng;

fn main() -> Result<()> {
    let domain = TorusDomain::unit_square();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let init = GeneratorSet::random(&domain, 200, &mut rng)?;

    let cfg = MacnConfig::new(1000, 5)?.with_seed(1).with_tol(1e-9);
    let trace = hybrid(&domain, &init, &cfg)?;
    for (q, stage) in trace.stages.iter().enumerate() {
        println!(
            "stage {q}: E-1 = {:.6e}  H = {:.1}%  R = {:.1}%  ({} inner iterations)",
            stage.measures.e_minus_1,
            100.0 * stage.measures.h,
            100.0 * stage.measures.r_eps,
            stage.inner_iterations,
        );
    }

    let best = &trace.best_stage().pcvt;
    let tess = build_tessellation(&domain, best)?;
    let reg = regularity(&tess, 0.005);
    println!(
        "best E-1 = {:.6e} with H = {:.1}%, R = {:.1}%",
        trace.best_e_minus_1(),
        100.0 * reg.h,
        100.0 * reg.r_eps
    );
    Ok(())
}
