//! Feature extraction: seven methods mapping N x L curve blocks to scalar
//! feature blocks, each with a fit-on-train / transform-anywhere contract.
//! Unfitted specs ([`ExtractorSpec`]) and fitted state ([`FittedExtractor`])
//! are separate types, so transforming before fit is unrepresentable.

pub mod bsignal;
pub mod dtw;
pub mod fourier;
pub mod multires;
pub mod pca;
pub mod tsfeat;
pub mod wavelets;

pub use bsignal::{bspline_design_matrix, BsignalParams};
pub use dtw::{band_half_width, dtw_distance, DtwKernelParams, RefMethod};
pub use fourier::{FourierCoeff, FourierParams};
pub use multires::MultiResParams;
pub use pca::PcaParams;
pub use tsfeat::TsfeatParams;
pub use wavelets::{Boundary, WaveletFilter, WaveletParams};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ParamMap, ParamValue};

/// Named scalar features extracted from one curve block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBlock {
    pub names: Vec<String>,
    pub values: Array2<f64>,
}

impl FeatureBlock {
    pub fn new(names: Vec<String>, values: Array2<f64>) -> Self {
        debug_assert_eq!(names.len(), values.ncols());
        Self { names, values }
    }

    pub fn width(&self) -> usize {
        self.values.ncols()
    }
}

/// An unfitted extractor: method plus parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum ExtractorSpec {
    Fourier(FourierParams),
    Wavelets(WaveletParams),
    Bsignal(BsignalParams),
    Pca(PcaParams),
    DtwKernel(DtwKernelParams),
    MultiRes(MultiResParams),
    Tsfeat(TsfeatParams),
}

pub const METHOD_NAMES: [&str; 7] = [
    "fourier",
    "wavelets",
    "bsignal",
    "pca",
    "dtwkernel",
    "multires",
    "tsfeat",
];

impl ExtractorSpec {
    pub fn method(&self) -> &'static str {
        match self {
            ExtractorSpec::Fourier(_) => "fourier",
            ExtractorSpec::Wavelets(_) => "wavelets",
            ExtractorSpec::Bsignal(_) => "bsignal",
            ExtractorSpec::Pca(_) => "pca",
            ExtractorSpec::DtwKernel(_) => "dtwkernel",
            ExtractorSpec::MultiRes(_) => "multires",
            ExtractorSpec::Tsfeat(_) => "tsfeat",
        }
    }

    /// Build a spec from a method name and a loose parameter map (config
    /// tables and `--params` strings). Unknown methods and parameters error.
    pub fn from_params(method: &str, params: &ParamMap) -> Result<Self> {
        match method {
            "fourier" => {
                params.reject_unknown("fourier", &["trafo_coeff", "trafo.coeff"])?;
                let coeff = params
                    .get_str("trafo_coeff", &params.get_str("trafo.coeff", "amplitude"))
                    .parse()?;
                Ok(ExtractorSpec::Fourier(FourierParams { coeff }))
            }
            "wavelets" => {
                params.reject_unknown("wavelets", &["filter", "boundary"])?;
                Ok(ExtractorSpec::Wavelets(WaveletParams {
                    filter: params.get_str("filter", "haar").parse()?,
                    boundary: params.get_str("boundary", "periodic").parse()?,
                }))
            }
            "bsignal" => {
                params.reject_unknown("bsignal", &["knots", "df"])?;
                Ok(ExtractorSpec::Bsignal(BsignalParams {
                    knots: params.get_usize("knots", 10)?,
                    df: params.get_f64("df", 3.0)?,
                }))
            }
            "pca" => {
                params.reject_unknown("pca", &["rank", "rank."])?;
                let rank = params.get_usize("rank", params.get_usize("rank.", 4)?)?;
                Ok(ExtractorSpec::Pca(PcaParams { rank }))
            }
            "dtwkernel" => {
                params.reject_unknown(
                    "dtwkernel",
                    &[
                        "ref_method",
                        "ref.method",
                        "n_refs",
                        "n.refs",
                        "window",
                        "dtwwindow",
                        "znorm",
                    ],
                )?;
                let d = DtwKernelParams::default();
                Ok(ExtractorSpec::DtwKernel(DtwKernelParams {
                    ref_method: params
                        .get_str("ref_method", &params.get_str("ref.method", "random"))
                        .parse()?,
                    n_refs: params.get_f64("n_refs", params.get_f64("n.refs", d.n_refs)?)?,
                    window: params.get_f64("window", params.get_f64("dtwwindow", d.window)?)?,
                    znorm: params.get_bool("znorm", d.znorm)?,
                }))
            }
            "multires" => {
                params.reject_unknown(
                    "multires",
                    &["res_level", "res.level", "shift", "with_variance"],
                )?;
                let d = MultiResParams::default();
                Ok(ExtractorSpec::MultiRes(MultiResParams {
                    res_level: params
                        .get_usize("res_level", params.get_usize("res.level", d.res_level)?)?,
                    shift: params.get_f64("shift", d.shift)?,
                    with_variance: params.get_bool("with_variance", d.with_variance)?,
                }))
            }
            "tsfeat" => {
                params.reject_unknown("tsfeat", &[])?;
                Ok(ExtractorSpec::Tsfeat(TsfeatParams::default()))
            }
            other => Err(Error::InvalidParam(format!(
                "unknown extraction method `{other}` (implemented: {})",
                METHOD_NAMES.join(", ")
            ))),
        }
    }

    /// Override one parameter by its tuning-space id. Both the dotted table
    /// ids (`trafo.coeff`, `rank.`, `res.level`, ...) and the underscore
    /// forms are accepted.
    pub fn set_param(&mut self, key: &str, value: &ParamValue) -> Result<()> {
        let bad_type =
            |key: &str, v: &ParamValue| Error::InvalidParam(format!("`{key}`: bad value {v}"));
        match self {
            ExtractorSpec::Fourier(p) => match key {
                "trafo.coeff" | "trafo_coeff" => {
                    p.coeff = value
                        .as_str()
                        .ok_or_else(|| bad_type(key, value))?
                        .parse()?;
                }
                _ => return Err(unknown_param("fourier", key)),
            },
            ExtractorSpec::Wavelets(p) => match key {
                "filter" => {
                    p.filter = value
                        .as_str()
                        .ok_or_else(|| bad_type(key, value))?
                        .parse()?;
                }
                "boundary" => {
                    p.boundary = value
                        .as_str()
                        .ok_or_else(|| bad_type(key, value))?
                        .parse()?;
                }
                _ => return Err(unknown_param("wavelets", key)),
            },
            ExtractorSpec::Bsignal(p) => match key {
                "bsignal.knots" | "knots" => {
                    p.knots = value.as_i64().ok_or_else(|| bad_type(key, value))? as usize;
                }
                "bsignal.df" | "df" => {
                    p.df = value.as_f64().ok_or_else(|| bad_type(key, value))?;
                }
                _ => return Err(unknown_param("bsignal", key)),
            },
            ExtractorSpec::Pca(p) => match key {
                "rank." | "rank" => {
                    p.rank = value.as_i64().ok_or_else(|| bad_type(key, value))? as usize;
                }
                _ => return Err(unknown_param("pca", key)),
            },
            ExtractorSpec::DtwKernel(p) => match key {
                "ref.method" | "ref_method" => {
                    p.ref_method = value
                        .as_str()
                        .ok_or_else(|| bad_type(key, value))?
                        .parse()?;
                }
                "n.refs" | "n_refs" => {
                    p.n_refs = value.as_f64().ok_or_else(|| bad_type(key, value))?;
                }
                "dtwwindow" | "window" => {
                    p.window = value.as_f64().ok_or_else(|| bad_type(key, value))?;
                }
                _ => return Err(unknown_param("dtwkernel", key)),
            },
            ExtractorSpec::MultiRes(p) => match key {
                "res.level" | "res_level" => {
                    p.res_level = value.as_i64().ok_or_else(|| bad_type(key, value))? as usize;
                }
                "shift" => {
                    p.shift = value.as_f64().ok_or_else(|| bad_type(key, value))?;
                }
                _ => return Err(unknown_param("multires", key)),
            },
            ExtractorSpec::Tsfeat(_) => return Err(unknown_param("tsfeat", key)),
        }
        Ok(())
    }

    /// Fit on training rows only. The grid is the curve's argument values;
    /// `seed` drives reference sampling for dtwkernel and is ignored by the
    /// deterministic methods.
    pub fn fit(&self, train: ArrayView2<f64>, grid: &[f64], seed: u64) -> Result<FittedExtractor> {
        if train.nrows() == 0 {
            return Err(Error::Shape("extractor fit on empty training set".into()));
        }
        Ok(match self {
            ExtractorSpec::Fourier(p) => FittedExtractor::Fourier(fourier::fit(p, train)?),
            ExtractorSpec::Wavelets(p) => FittedExtractor::Wavelets(wavelets::fit(p, train)?),
            ExtractorSpec::Bsignal(p) => FittedExtractor::Bsignal(bsignal::fit(p, train, grid)?),
            ExtractorSpec::Pca(p) => FittedExtractor::Pca(pca::fit(p, train)?),
            ExtractorSpec::DtwKernel(p) => FittedExtractor::DtwKernel(dtw::fit(p, train, seed)?),
            ExtractorSpec::MultiRes(p) => FittedExtractor::MultiRes(multires::fit(p, train)?),
            ExtractorSpec::Tsfeat(p) => FittedExtractor::Tsfeat(tsfeat::fit(p, train)?),
        })
    }
}

fn unknown_param(method: &str, key: &str) -> Error {
    Error::InvalidParam(format!("no tunable parameter `{key}` on {method}"))
}

/// Fitted extractor state; learned on training rows, applicable anywhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FittedExtractor {
    Fourier(fourier::FourierFitted),
    Wavelets(wavelets::WaveletFitted),
    Bsignal(bsignal::BsignalFitted),
    Pca(pca::PcaFitted),
    DtwKernel(dtw::DtwKernelFitted),
    MultiRes(multires::MultiResFitted),
    Tsfeat(tsfeat::TsfeatFitted),
}

impl FittedExtractor {
    pub fn output_width(&self) -> usize {
        match self {
            FittedExtractor::Fourier(f) => f.output_width(),
            FittedExtractor::Wavelets(f) => f.output_width(),
            FittedExtractor::Bsignal(f) => f.output_width(),
            FittedExtractor::Pca(f) => f.output_width(),
            FittedExtractor::DtwKernel(f) => f.output_width(),
            FittedExtractor::MultiRes(f) => f.output_width(),
            FittedExtractor::Tsfeat(f) => f.output_width(),
        }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<FeatureBlock> {
        let block = match self {
            FittedExtractor::Fourier(f) => f.transform(x)?,
            FittedExtractor::Wavelets(f) => f.transform(x)?,
            FittedExtractor::Bsignal(f) => f.transform(x)?,
            FittedExtractor::Pca(f) => f.transform(x)?,
            FittedExtractor::DtwKernel(f) => f.transform(x)?,
            FittedExtractor::MultiRes(f) => f.transform(x)?,
            FittedExtractor::Tsfeat(f) => f.transform(x)?,
        };
        debug_assert_eq!(block.width(), self.output_width());
        Ok(block)
    }
}
