use pcvt::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let from: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(25);
    let to: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let dom = TorusDomain::hexagonal_unit_area();
    let t0 = Instant::now();
    for run in from..to {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        rng.set_stream(run);
        let init = GeneratorSet::random(&dom, 973, &mut rng).unwrap();
        let mut cfg = MacnConfig::new(6000, 10).unwrap().with_tol(1e-12);
        cfg.rng_seed = rng.random();
        let tr = hybrid(&dom, &init, &cfg).unwrap();
        let best = tr.best_e_minus_1();
        println!("run {run}: best E-1 = {best:.3e}  [{:.0}s]", t0.elapsed().as_secs_f64());
        if best < 1e-10 {
            println!("GROUND STATE at run {run}");
        }
    }
}
