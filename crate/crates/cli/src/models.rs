//! Frame models built from a configuration.

use anyhow::{Context, Result};
use framedisc_core::frames::{
    calderon_constant, coordinate_subspace, exponential_frame, frame_operator, gabor_frame,
    gabor_window_norm_sq, gaussian_window, sinc_kernel_frame, spectral_subspace, wavelet_frame,
    FrameModel, WaveletSpec,
};
use framedisc_core::operators::HermitianOp;
use framedisc_core::spaces::{Region, SpaceModel};

use crate::config::{ExperimentConfig, FrameSpec, WaveletProfile};

/// A frame ready for the pipeline, with the scalar `c` of the tight target
/// `c·I` it approximates (when one is known).
pub struct BuiltFrame {
    pub frame: FrameModel,
    pub tight_constant: Option<f64>,
}

impl BuiltFrame {
    /// `‖S_quad − c·I‖ / c`, the measured quadrature gap to the tight target.
    pub fn quadrature_gap(&self) -> Result<Option<f64>> {
        let Some(c) = self.tight_constant else {
            return Ok(None);
        };
        let s = frame_operator(&self.frame)?;
        let target = HermitianOp::identity(self.frame.dim()).scaled(c);
        Ok(Some(s.sub(&target)?.op_norm()? / c))
    }
}

fn space_for(cfg: &ExperimentConfig, mut space: SpaceModel) -> SpaceModel {
    if let Some(r) = cfg.space.small_scale_cutoff {
        space.small_scale_cutoff = r;
    }
    space
}

pub fn build_frame(cfg: &ExperimentConfig) -> Result<BuiltFrame> {
    let (frame, tight_constant) = match &cfg.frame {
        FrameSpec::Exponential { n, interval } => {
            let space = space_for(cfg, SpaceModel::euclidean(1));
            let region = Region::grid(&space, &cfg.grid.intervals, &cfg.grid.counts)?;
            let f = exponential_frame(space, *interval, *n, region)?;
            (f, Some(interval.1 - interval.0))
        }
        FrameSpec::Gabor {
            n,
            time,
            band_radius,
        } => {
            let space = space_for(cfg, SpaceModel::euclidean(2));
            let region = Region::grid(&space, &cfg.grid.intervals, &cfg.grid.counts)?;
            let window = gaussian_window();
            let g_sq = gabor_window_norm_sq(&window);
            let full = gabor_frame(space, window, *n, *time, region)?;
            let f = match band_radius {
                Some(radius) => {
                    let h = (time.1 - time.0) / *n as f64;
                    let band: Vec<usize> = (0..*n)
                        .filter(|&k| (time.0 + (k as f64 + 0.5) * h).abs() <= *radius)
                        .collect();
                    let sub = coordinate_subspace(*n, &band)?;
                    full.compressed(&sub, "gabor-band")?
                }
                None => full,
            };
            (f, Some(g_sq))
        }
        FrameSpec::Wavelet {
            profile,
            n,
            time,
            spectral_floor,
        } => {
            let space = space_for(cfg, SpaceModel::hyperbolic());
            let region = Region::grid(&space, &cfg.grid.intervals, &cfg.grid.counts)?;
            let spec = match profile {
                WaveletProfile::Band { lo, hi } => WaveletSpec::band(*lo, *hi)?,
                WaveletProfile::OddGaussian => WaveletSpec::odd_gaussian(),
            };
            let c = calderon_constant(&spec)?.require_admissible()?;
            let full = wavelet_frame(space, &spec, *n, *time, region)?;
            (
                spectral_band(full, *spectral_floor, "wavelet-band")?,
                Some(c),
            )
        }
        FrameSpec::Sinc {
            bandwidth,
            interval,
            n,
            spectral_floor,
        } => {
            let space = space_for(cfg, SpaceModel::euclidean(1));
            let region = Region::grid(&space, &cfg.grid.intervals, &cfg.grid.counts)?;
            let full = sinc_kernel_frame(space, *bandwidth, *interval, *n, region)?;
            // The kernel frame is a Parseval frame of the Paley–Wiener space.
            (
                spectral_band(full, *spectral_floor, "sinc-band")?,
                Some(1.0),
            )
        }
    };
    Ok(BuiltFrame {
        frame,
        tight_constant,
    })
}

/// Compresses onto the eigenvectors above `floor` times the top eigenvalue.
fn spectral_band(frame: FrameModel, floor: Option<f64>, label: &str) -> Result<FrameModel> {
    let Some(floor) = floor else {
        return Ok(frame);
    };
    let s = frame_operator(&frame)?;
    let sub = spectral_subspace(&s, floor).context("spectral band")?;
    Ok(frame.compressed(&sub, label)?)
}
