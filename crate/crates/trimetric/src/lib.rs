//! Security metrics for desk-scale AI artifacts.
//!
//! Three complementary measurements of a self-contained system — a small
//! serialized feedforward model, an iterated map, or a normal-form game —
//! plus the machinery to combine them into comparable scores:
//!
//! * **Complexity** ([`sci`]): the LZW-compressed size of the system's
//!   canonical serialization, normalized by the log-size of its declared
//!   input space. Compression gives a computable upper bound on description
//!   length; exact minimal description length is uncomputable.
//! * **Stability** ([`leais`]): worst-case per-input-dimension growth rates
//!   from Jacobian column norms at sampled points, and the classical
//!   trajectory-averaged Lyapunov exponent for one-dimensional maps.
//! * **Strategic robustness** ([`game`]): distance-to-best-response along
//!   learning-dynamics trajectories of a game model, plus a gridded
//!   profitable-deviation distance at verified Nash equilibria.
//!
//! [`scoring`] normalizes metric triples over a cohort and produces both the
//! plain weighted sum and an orientation-corrected risk score along with 3D
//! comparison exports; [`report`] wires everything into deterministic,
//! reproducible batch runs.
//!
//! Everything is pure and deterministic: fixed PRNGs ([`rng`]), a pinned
//! codec ([`codec`]), canonical serialization ([`model`]), and sorted-key
//! JSON output. Identical inputs produce identical bytes on every platform.

pub mod codec;
pub mod game;
pub mod leais;
pub mod model;
pub mod report;
pub mod rng;
pub mod sci;
pub mod scoring;

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::{Activation, InputSpec, Layer, MlpModel};
    use crate::rng::XorShiftStar;

    /// Random tanh network with `layers` layers and widths in `1..=max_width`,
    /// weights scaled by `1/sqrt(in_dim)` to keep pre-activations moderate.
    pub fn random_tanh_model(rng: &mut XorShiftStar, layers: usize, max_width: usize) -> MlpModel {
        let dims = 1 + (rng.next_u64() as usize) % max_width;
        let mut widths = vec![dims];
        for _ in 0..layers {
            widths.push(1 + (rng.next_u64() as usize) % max_width);
        }
        let mut built = Vec::new();
        for k in 0..layers {
            let (inp, out) = (widths[k], widths[k + 1]);
            let scale = 1.0 / (inp as f64).sqrt();
            let weights = (0..out)
                .map(|_| {
                    (0..inp)
                        .map(|_| rng.next_in_range(-1.0, 1.0) * scale)
                        .collect()
                })
                .collect();
            let bias = (0..out).map(|_| rng.next_in_range(-0.5, 0.5)).collect();
            built.push(Layer {
                weights,
                bias,
                activation: Activation::Tanh,
            });
        }
        let spec = InputSpec::new(dims as u32, 8, vec![-1.0; dims], vec![1.0; dims]).unwrap();
        MlpModel::new(spec, built).unwrap()
    }
}
