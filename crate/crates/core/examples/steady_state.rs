//! Stationary law of the 27-state pair chain and its marginals.
//!
//! cargo run --example steady_state

use signet::chain::{marginals, pair_label, pair_stationary, Marginals, Stationary};
use signet::dynamics::Params;

pub fn run_example(kappa: f64) -> signet::Result<(Stationary, Marginals)> {
    let p = Params { beta: 6.0, beta_a: 1.8, kappa, delta: 9.0, dt: 0.001, alpha: 0.5 };
    let st = pair_stationary(&p, None)?;
    let m = marginals(&st.pi);
    Ok((st, m))
}

fn main() -> signet::Result<()> {
    for kappa in [0.0, 4.0] {
        let (st, m) = run_example(kappa)?;
        println!("kappa={kappa}: s={:.4} a={:.4} rho={:.4} r={:.4} residual={:.1e}", m.s, m.a, m.rho, m.r, st.residual);
        for class in st.classes.iter().filter(|c| c.weight > 0.0) {
            let names: Vec<String> = class.states.iter().map(|&i| pair_label(i)).collect();
            println!("  closed class {:?} weight {:.4} period {}", names, class.weight, class.period);
        }
    }
    Ok(())
}
