//! Training losses with analytic gradients.
//!
//! ```text
//! total    = λ₁·L_matte + λ₂·L_ini + L_W
//! L_matte  = mean |matte_pred − matte_gt|
//! L_ini    = mean (fusion_ini − fusion_gt)²
//! L_W      = mean W·(fusion_fin − fusion_gt)²
//! W        = (1 + (k − 1)·(1 − |2·matte − 1|)) / k
//! ```
//!
//! `W` is a per-pixel map broadcast over colour channels. All reductions sum
//! sequentially in memory order, so results are bit-reproducible.

use serde::Serialize;

use crate::error::{arg_err, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Which matte drives the weight map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum WeightSource {
    /// The predicted matte; the weight then also contributes to the matte gradient.
    #[default]
    Predicted,
    /// The ground-truth matte (ablation).
    GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    pub k: f64,
    pub weight_source: WeightSource,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.2,
            lambda2: 0.2,
            k: 5.0,
            weight_source: WeightSource::Predicted,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return arg_err(format!("weight contrast k must be >= 1, got {}", self.k));
        }
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return arg_err("trade-off weights must be non-negative");
        }
        Ok(())
    }
}

/// A scalar loss with its gradient with respect to the prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue<T> {
    pub value: T,
    pub grad: Image<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a, T> {
    pub matte_pred: &'a Image<T>,
    pub matte_gt: &'a Image<T>,
    pub fusion_ini: &'a Image<T>,
    pub fusion_fin: &'a Image<T>,
    pub fusion_gt: &'a Image<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossGrads<T> {
    pub matte: Image<T>,
    pub fusion_ini: Image<T>,
    pub fusion_fin: Image<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown<T> {
    pub matte: T,
    pub ini: T,
    pub weighted: T,
    pub total: T,
    pub grads: LossGrads<T>,
}

fn count<T: Scalar>(img: &Image<T>) -> T {
    T::from_usize(img.data().len()).unwrap()
}

/// Mean absolute difference. The subgradient at a zero residual is 0.
pub fn loss_matte<T: Scalar>(pred: &Image<T>, gt: &Image<T>) -> Result<LossValue<T>> {
    pred.ensure_single_channel("matte prediction")?;
    pred.ensure_same_shape(gt, "loss_matte")?;
    let n = count(pred);
    let mut sum = T::zero();
    let grad = pred.zip_map(gt, |p, g| {
        let r = p - g;
        sum = sum + r.abs();
        sign(r) / n
    })?;
    Ok(LossValue { value: sum / n, grad })
}

/// Mean squared difference.
pub fn loss_ini<T: Scalar>(pred: &Image<T>, gt: &Image<T>) -> Result<LossValue<T>> {
    pred.ensure_same_shape(gt, "loss_ini")?;
    let n = count(pred);
    let mut sum = T::zero();
    let grad = pred.zip_map(gt, |p, g| {
        let r = p - g;
        sum = sum + r * r;
        T::two() * r / n
    })?;
    Ok(LossValue { value: sum / n, grad })
}

/// Boundary-emphasis weight: 1 where the matte is 0.5, `1/k` where it is 0 or 1.
pub fn weight_map<T: Scalar>(matte: &Image<T>, k: T) -> Result<Image<T>> {
    matte.ensure_single_channel("weight matte")?;
    if k.is_nan() || k < T::one() || !k.is_finite() {
        return arg_err(format!("weight contrast k must be >= 1, got {k}"));
    }
    if let Some(v) = matte.data().iter().find(|&&m| m < T::zero() || m > T::one()) {
        return arg_err(format!("matte value {v} outside [0, 1]"));
    }
    let km1 = k - T::one();
    Ok(matte.map(|m| (T::one() + km1 * (T::one() - (T::two() * m - T::one()).abs())) / k))
}

/// `dW/dmatte`, with the subgradient 0 at matte = 0.5.
fn weight_slope<T: Scalar>(m: T, k: T) -> T {
    -T::two() * (k - T::one()) / k * sign(T::two() * m - T::one())
}

/// Mean of the per-pixel weighted squared error; `w` is single-channel and
/// broadcast over the channels of the fusion images.
pub fn loss_weighted<T: Scalar>(fin: &Image<T>, gt: &Image<T>, w: &Image<T>) -> Result<LossValue<T>> {
    fin.ensure_same_shape(gt, "loss_weighted")?;
    w.ensure_single_channel("weight map")?;
    fin.ensure_same_dims(w, "loss_weighted weight")?;
    let n = count(fin);
    let c = fin.channels();
    let mut sum = T::zero();
    let mut grad = fin.clone();
    for (i, ((&p, &g), o)) in fin.data().iter().zip(gt.data()).zip(grad.data_mut()).enumerate() {
        let wt = w.data()[i / c];
        let r = p - g;
        sum = sum + wt * r * r;
        *o = T::two() * wt * r / n;
    }
    Ok(LossValue { value: sum / n, grad })
}

/// All three components, the weighted total and the gradients of the total
/// with respect to the predicted matte, initial fusion and final fusion.
pub fn loss_total<T: Scalar>(inputs: LossInputs<'_, T>, cfg: &LossConfig) -> Result<LossBreakdown<T>> {
    cfg.validate()?;
    let k = T::lit(cfg.k);
    let (l1, l2) = (T::lit(cfg.lambda1), T::lit(cfg.lambda2));
    let matte = loss_matte(inputs.matte_pred, inputs.matte_gt)?;
    let ini = loss_ini(inputs.fusion_ini, inputs.fusion_gt)?;
    let weight_matte = match cfg.weight_source {
        WeightSource::Predicted => inputs.matte_pred,
        WeightSource::GroundTruth => inputs.matte_gt,
    };
    let w = weight_map(weight_matte, k)?;
    let weighted = loss_weighted(inputs.fusion_fin, inputs.fusion_gt, &w)?;

    let mut matte_grad = matte.grad.map(|g| l1 * g);
    if cfg.weight_source == WeightSource::Predicted {
        // L_W also depends on the predicted matte through W.
        let n = count(inputs.fusion_fin);
        let c = inputs.fusion_fin.channels();
        for (p, g) in matte_grad.data_mut().iter_mut().enumerate() {
            let mut sq = T::zero();
            for ch in 0..c {
                let r = inputs.fusion_fin.data()[p * c + ch] - inputs.fusion_gt.data()[p * c + ch];
                sq = sq + r * r;
            }
            *g = *g + sq / n * weight_slope(inputs.matte_pred.data()[p], k);
        }
    }

    Ok(LossBreakdown {
        matte: matte.value,
        ini: ini.value,
        weighted: weighted.value,
        total: l1 * matte.value + l2 * ini.value + weighted.value,
        grads: LossGrads {
            matte: matte_grad,
            fusion_ini: ini.grad.map(|g| l2 * g),
            fusion_fin: weighted.grad,
        },
    })
}

#[inline]
fn sign<T: Scalar>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Summary of a central-difference check of [`loss_total`].
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub matte: f64,
    pub ini: f64,
    pub weighted: f64,
    pub total: f64,
    /// Max relative error of the matte gradient, at pixels away from kinks.
    pub max_rel_error_matte: f64,
    /// Max relative error over the initial and final fusion gradients.
    pub max_rel_error_fusion: f64,
    pub checked_matte: usize,
    pub skipped_matte: usize,
    pub checked_fusion: usize,
}

/// Compares the analytic gradient of [`loss_total`] with central differences
/// of step `h`. Matte pixels within `kink_margin` of a zero residual or of
/// matte = 0.5 are skipped.
pub fn gradient_check(inputs: LossInputs<'_, f64>, cfg: &LossConfig, h: f64, kink_margin: f64) -> Result<GradCheckReport> {
    let base = loss_total(inputs, cfg)?;
    let total_with = |which: usize, i: usize, delta: f64| -> Result<f64> {
        let mut imgs = [
            inputs.matte_pred.clone(),
            inputs.fusion_ini.clone(),
            inputs.fusion_fin.clone(),
        ];
        imgs[which].data_mut()[i] += delta;
        let perturbed = LossInputs {
            matte_pred: &imgs[0],
            fusion_ini: &imgs[1],
            fusion_fin: &imgs[2],
            ..inputs
        };
        Ok(loss_total(perturbed, cfg)?.total)
    };
    let rel = |a: f64, b: f64| {
        let d = a.abs().max(b.abs());
        if d < 1e-300 {
            0.0
        } else {
            (a - b).abs() / d
        }
    };

    let mut report = GradCheckReport {
        matte: base.matte,
        ini: base.ini,
        weighted: base.weighted,
        total: base.total,
        max_rel_error_matte: 0.0,
        max_rel_error_fusion: 0.0,
        checked_matte: 0,
        skipped_matte: 0,
        checked_fusion: 0,
    };
    for i in 0..inputs.matte_pred.data().len() {
        let m = inputs.matte_pred.data()[i];
        let residual = m - inputs.matte_gt.data()[i];
        let near_w_kink = cfg.weight_source == WeightSource::Predicted && (2.0 * m - 1.0).abs() <= kink_margin;
        if residual.abs() <= kink_margin || near_w_kink {
            report.skipped_matte += 1;
            continue;
        }
        let fd = (total_with(0, i, h)? - total_with(0, i, -h)?) / (2.0 * h);
        report.max_rel_error_matte = report.max_rel_error_matte.max(rel(base.grads.matte.data()[i], fd));
        report.checked_matte += 1;
    }
    for (which, grad) in [(1, &base.grads.fusion_ini), (2, &base.grads.fusion_fin)] {
        for i in 0..grad.data().len() {
            let fd = (total_with(which, i, h)? - total_with(which, i, -h)?) / (2.0 * h);
            report.max_rel_error_fusion = report.max_rel_error_fusion.max(rel(grad.data()[i], fd));
            report.checked_fusion += 1;
        }
    }
    Ok(report)
}
