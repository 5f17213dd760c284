//! Deterministic sampling helpers. Every randomized check in the crate
//! draws from a seeded ChaCha8 stream so reports are reproducible.

use crate::expr::Expr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in `[lo, hi]^dim`.
pub fn point(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Random polynomial of total degree <= `deg` in the given variables, with
/// coefficients in `[-1, 1]`.
pub fn polynomial(rng: &mut ChaCha8Rng, vars: &[String], deg: usize) -> Expr {
    let mut acc = Expr::constant(rng.gen_range(-1.0..1.0));
    for _ in 0..(2 * vars.len() + 2) {
        let mut term = Expr::constant(rng.gen_range(-1.0..1.0));
        let d = rng.gen_range(0..=deg);
        for _ in 0..d {
            let v = &vars[rng.gen_range(0..vars.len())];
            term = term * Expr::var(v);
        }
        acc = acc + term;
    }
    acc
}

/// Random trigonometric polynomial: sums of `c * sin(k x_i)` and cosines.
pub fn trig_polynomial(rng: &mut ChaCha8Rng, vars: &[String]) -> Expr {
    let mut acc = Expr::constant(rng.gen_range(-1.0..1.0));
    for _ in 0..(vars.len() + 2) {
        let c = Expr::constant(rng.gen_range(-1.0..1.0));
        let k = Expr::constant(rng.gen_range(1..=2) as f64);
        let v = Expr::var(&vars[rng.gen_range(0..vars.len())]);
        let arg = k * v;
        let wave = if rng.gen_bool(0.5) { arg.sin() } else { arg.cos() };
        acc = acc + c * wave;
    }
    acc
}

/// Random algebra coordinates in `[-scale, scale]^d`.
pub fn algebra_coords(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-scale..scale)).collect()
}

/// Random algebra-valued polynomial gauge field: `field[mu][a]` is the
/// coefficient expression of basis element `a` in `A_mu`.
pub fn gauge_field_exprs(
    rng: &mut ChaCha8Rng,
    base_vars: &[String],
    m: usize,
    d: usize,
    deg: usize,
) -> Vec<Vec<Expr>> {
    (0..m)
        .map(|_| (0..d).map(|_| polynomial(rng, base_vars, deg)).collect())
        .collect()
}
