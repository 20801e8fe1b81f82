//! Run configuration assembled from a JSON file and command-line flags.

use crate::args::{KernelArgs, KernelName, RunArgs};
use crate::error::{missing, CliError, CliResult};
use crate::svg::Style;
use mp_core::kernel::DEFAULT_EPS;
use mp_core::{CurveConstraintSpec, InitStrategy, KernelSpec, NormIndex};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_SIGMA: f64 = 0.05;

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub n: Option<usize>,
    pub iters: Option<usize>,
    pub gamma: Option<f64>,
    pub kernel: Option<KernelName>,
    pub eps: Option<f64>,
    pub sigma: Option<f64>,
    pub m: Option<usize>,
    pub q: Option<NormIndex>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    /// A full curve constraint `{m, q, alphas, N, T}`; individual flags still win.
    pub constraint: Option<CurveConstraintSpec>,
    pub init: Option<InitStrategy>,
    pub seed: Option<u64>,
    pub invert: Option<bool>,
    pub radius: Option<f64>,
    pub canvas: Option<f64>,
    pub refine: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved settings of a `stipple` or `lineart` run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub input: PathBuf,
    pub out: PathBuf,
    pub n: usize,
    pub iters: usize,
    pub gamma: Option<f64>,
    pub kernel: KernelSpec,
    pub init: InitStrategy,
    pub seed: u64,
    pub invert: bool,
    pub style: Style,
    pub refine: Option<usize>,
    /// Curve constraint for `lineart`.
    pub curve: Option<CurveConstraintSpec>,
}

pub fn resolve_kernel(flags: &KernelArgs, file: &RunConfig) -> CliResult<KernelSpec> {
    let name = flags.kernel.or(file.kernel).unwrap_or(KernelName::L1s);
    let eps = flags.eps.or(file.eps).unwrap_or(DEFAULT_EPS);
    let sigma = flags.sigma.or(file.sigma).unwrap_or(DEFAULT_SIGMA);
    let k = match name {
        KernelName::L1s => KernelSpec::SmoothedL1 { eps },
        KernelName::L2s => KernelSpec::SmoothedL2 { eps },
        KernelName::Gauss => KernelSpec::Gaussian { sigma },
    };
    k.validate()?;
    Ok(k)
}

/// Drops a trailing `.svg`, `.csv` or `.json` so that `--out a.svg` and `--out a` agree.
pub fn output_stem(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("svg" | "csv" | "json" | "dat") => out.with_extension(""),
        _ => out.to_path_buf(),
    }
}

pub fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

impl Settings {
    /// Merges flags over the optional config file. `curve` selects the
    /// line-drawing defaults and builds the constraint.
    pub fn resolve(flags: &RunArgs, curve: bool) -> CliResult<Self> {
        let file = match &flags.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let input = flags.input.clone().or(file.input.clone()).ok_or_else(|| missing("in"))?;
        let out = output_stem(&flags.out.clone().or(file.out.clone()).ok_or_else(|| missing("out"))?);
        let spec_n = file.constraint.as_ref().map(|c| c.n);
        let n = flags.n.or(file.n).or(spec_n).unwrap_or(if curve { 2000 } else { 1000 });
        if n == 0 {
            return Err(CliError::Validation("--n must be positive".into()));
        }
        let defaults = Style::default();
        let style = Style {
            canvas: flags.canvas.or(file.canvas).unwrap_or(defaults.canvas),
            radius: flags.radius.or(file.radius).unwrap_or(defaults.radius),
            stroke_width: defaults.stroke_width,
        };
        if !(style.canvas > 0.0 && style.radius >= 0.0) {
            return Err(CliError::Validation("canvas must be positive and radius nonnegative".into()));
        }
        let gamma = flags.gamma.or(file.gamma);
        if let Some(g) = gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(CliError::Validation(format!("--gamma must be positive, got {g}")));
            }
        }
        let curve = if curve { Some(resolve_curve(flags, &file, n)?) } else { None };
        Ok(Settings {
            input,
            out,
            n,
            iters: flags.iters.or(file.iters).unwrap_or(1000),
            gamma,
            kernel: resolve_kernel(&flags.kernel, &file)?,
            init: flags.init.or(file.init).unwrap_or(if curve.is_some() {
                InitStrategy::Spiral
            } else {
                InitStrategy::RandomRejection
            }),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            invert: !flags.no_invert && file.invert.unwrap_or(true),
            style,
            refine: flags.refine.or(file.refine),
            curve,
        })
    }
}

fn resolve_curve(flags: &RunArgs, file: &RunConfig, n: usize) -> CliResult<CurveConstraintSpec> {
    let base = file.constraint.as_ref();
    let m = flags.m.or(file.m).or(base.map(|c| c.m)).unwrap_or(1);
    let q = flags.q.or(file.q).or(base.map(|c| c.q)).unwrap_or(NormIndex::Inf);
    let t = flags.t.or(file.t).or(base.map(|c| c.t)).unwrap_or(1.0);
    let from_base = |j: usize| base.and_then(|c| c.alphas.get(j).copied());
    let a1 = flags.alpha1.or(file.alpha1).or(from_base(0)).unwrap_or(20.0);
    let mut alphas = vec![a1];
    if m >= 2 {
        let a2 = flags.alpha2.or(file.alpha2).or(from_base(1)).ok_or_else(|| missing("alpha2"))?;
        alphas.push(a2);
    }
    Ok(CurveConstraintSpec::new(m, q, alphas, n, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> RunArgs {
        RunArgs {
            input: Some("img.png".into()),
            out: Some("out/x.svg".into()),
            ..Default::default()
        }
    }

    #[test]
    fn defaults() {
        let s = Settings::resolve(&flags(), false).unwrap();
        assert_eq!(s.out, PathBuf::from("out/x"));
        assert_eq!(s.n, 1000);
        assert_eq!(s.kernel, KernelSpec::SmoothedL1 { eps: DEFAULT_EPS });
        assert!(s.invert && s.curve.is_none());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(
            &p,
            r#"{"n": 50, "iters": 7, "kernel": "gauss", "sigma": 0.1,
                "constraint": {"m": 2, "q": "2", "alphas": [3.0, 40.0], "N": 50, "T": 2.0}}"#,
        )
        .unwrap();
        let mut f = flags();
        f.config = Some(p);
        f.n = Some(60);
        f.alpha1 = Some(5.0);
        let s = Settings::resolve(&f, true).unwrap();
        assert_eq!((s.n, s.iters), (60, 7));
        assert_eq!(s.kernel, KernelSpec::Gaussian { sigma: 0.1 });
        let c = s.curve.unwrap();
        assert_eq!((c.m, c.q, c.n, c.t), (2, NormIndex::Two, 60, 2.0));
        assert_eq!(c.alphas, vec![5.0, 40.0]);
        assert_eq!(s.init, InitStrategy::Spiral);
    }

    #[test]
    fn unknown_keys_and_missing_input_are_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"bogus": 1}"#).unwrap();
        let mut f = flags();
        f.config = Some(p);
        assert_eq!(Settings::resolve(&f, false).unwrap_err().exit_code(), 1);
        let f = RunArgs::default();
        assert_eq!(Settings::resolve(&f, false).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn second_order_needs_alpha2() {
        let mut f = flags();
        f.m = Some(2);
        assert!(Settings::resolve(&f, true).is_err());
        f.alpha2 = Some(100.0);
        assert_eq!(Settings::resolve(&f, true).unwrap().curve.unwrap().alphas.len(), 2);
    }
}
