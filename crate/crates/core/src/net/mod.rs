//! Fully-connected binary classifier trained from scratch: dense layers with
//! ReLU between them, a sigmoid output, binary cross-entropy and Adam.

mod adam;
mod checkpoint;
mod mlp;
mod train;

pub use adam::{AdamParams, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC};
pub use mlp::{layer_dims, DenseLayer, Gradients, LayerGrad, Mlp, DEFAULT_HIDDEN};
pub use train::{epochs_to_converge, train, TrainConfig, TrainHistory};

/// Logistic function, evaluated without overflow for any finite input.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(z)` against `y`, computed from the
/// logit as `max(z, 0) - z*y + ln(1 + exp(-|z|))`.
pub fn bce_with_logits(z: f64, y: u8) -> f64 {
    z.max(0.0) - z * f64::from(y) + (-z.abs()).exp().ln_1p()
}

/// Derivative of [`bce_with_logits`] with respect to the logit.
pub fn bce_logit_grad(z: f64, y: u8) -> f64 {
    sigmoid(z) - f64::from(y)
}

/// Binary cross-entropy on a probability. Only meant for reporting; the
/// probability is clamped away from 0 and 1.
pub fn bce_loss(p: f64, y: u8) -> f64 {
    let p = p.clamp(f64::EPSILON, 1.0 - f64::EPSILON);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Decision at probability 0.5, i.e. logit 0. Ties go to the positive class.
pub fn decide(logit: f64) -> u8 {
    u8::from(logit >= 0.0)
}
