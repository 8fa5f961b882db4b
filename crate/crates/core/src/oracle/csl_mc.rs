//! Real-space Monte Carlo estimate of the collapse heating rate.
//!
//! Integrating the gradient double integral by parts gives
//! `m² E[−∇²K(|r − r'|)]` for `r, r'` uniform in the sphere, with
//! `K(s) = e^{−s²/4r_C²}/(2√π r_C)³` and
//! `−∇²K = K (3/(2r_C²) − s²/(4r_C⁴))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::constants::{AMU, HBAR};
use crate::csl::CslParams;

/// Fixed partition count, so results do not depend on the thread pool.
const CHUNKS: u64 = 64;

#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

fn uniform_in_ball<R: Rng>(rng: &mut R, radius: f64) -> [f64; 3] {
    loop {
        let p = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
            return p.map(|c: f64| c * radius);
        }
    }
}

pub fn csl_delta_real_space(csl: &CslParams, omega_m: f64, samples: u64, seed: u64) -> McEstimate {
    let rc2 = csl.r_c * csl.r_c;
    let norm = (2.0 * std::f64::consts::PI.sqrt() * csl.r_c).powi(-3);
    let per_chunk = samples.div_ceil(CHUNKS);
    let (sum, sum_sq, count) = (0..CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..per_chunk {
                let a = uniform_in_ball(&mut rng, csl.sphere_radius);
                let b = uniform_in_ball(&mut rng, csl.sphere_radius);
                let d2: f64 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum();
                let k = norm * (-d2 / (4.0 * rc2)).exp();
                let v = k * (1.5 / rc2 - d2 / (4.0 * rc2 * rc2));
                s += v;
                s2 += v * v;
            }
            (s, s2, per_chunk)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0, 0u64), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
    let n = count as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean) * n / (n - 1.0);
    let prefactor = HBAR * csl.gamma_csl / (3.0 * csl.mass * omega_m * AMU * AMU) * csl.mass * csl.mass;
    McEstimate {
        mean: prefactor * mean,
        std_error: prefactor * (var / n).sqrt(),
    }
}
