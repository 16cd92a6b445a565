//! Experiment configuration: flat `key = value` lines grouped under `[section]`
//! headers. Every value keeps its line number so that load-time validation can
//! point at the offending key.
//!
//! ```text
//! [dimensions]
//! n = 4
//! m = 2
//! k = 1
//! alpha = 2
//!
//! [phantom]
//! kind = gaussian        # gaussian | dog | shifted | zero | mixture
//! width = 0.8
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{GaussianMixtureField, GaussianTerm, GridSpec};
use crate::inversion::TruncationSchedule;
use crate::linalg::{check_plane_codim, OrderParams};
use crate::wavelet::{Band, SpectralWavelet, WaveletSpec};

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

/// Parsed `section.key -> value` map. Repeated keys are kept in order.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, Vec<Entry>>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Config { line: i + 1, key: line.into(), message: "unterminated section header".into() })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config { line: i + 1, key: line.into(), message: "expected key = value".into() })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config { line: i + 1, key: String::new(), message: "empty key".into() });
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            entries.entry(full).or_default().push(Entry { line: i + 1, value: value.trim().to_string() });
        }
        Ok(KeyValues { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Line of the last occurrence of `key`, 0 if absent.
    pub fn line(&self, key: &str) -> usize {
        self.entries.get(key).and_then(|v| v.last()).map_or(0, |e| e.line)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn error(&self, key: &str, message: impl Into<String>) -> Error {
        Error::Config { line: self.line(key), key: key.into(), message: message.into() }
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.entries.get(key).and_then(|v| v.last()) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| Error::Config { line: e.line, key: key.into(), message: format!("cannot parse `{}`", e.value) }),
        }
    }

    pub fn get_str(&self, key: &str, default: &str) -> String {
        self.entries.get(key).and_then(|v| v.last()).map_or_else(|| default.to_string(), |e| e.value.clone())
    }

    /// Comma-separated numbers, one list per occurrence of `key`.
    pub fn get_lists(&self, key: &str) -> Result<Vec<Vec<f64>>> {
        let Some(all) = self.entries.get(key) else {
            return Ok(Vec::new());
        };
        all.iter()
            .map(|e| {
                e.value
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Config { line: e.line, key: key.into(), message: format!("`{}` is not a number", s.trim()) }))
                    .collect()
            })
            .collect()
    }
}

const KNOWN_KEYS: &[&str] = &[
    "dimensions.n",
    "dimensions.m",
    "dimensions.k",
    "dimensions.alpha",
    "phantom.kind",
    "phantom.width",
    "phantom.center",
    "phantom.term",
    "wavelet.file",
    "wavelet.delta",
    "wavelet.lambda",
    "wavelet.bump_degree",
    "wavelet.partner_dilation",
    "schedule.steps",
    "schedule.ratio",
    "schedule.resolution",
    "schedule.spectral_resolution",
    "sampling.seed",
    "sampling.samples",
    "sampling.frames",
    "sampling.pairs",
    "grid.points",
    "grid.extent",
    "grid.slice_points",
    "grid.radon_frames",
    "transform.scale",
    "output.dir",
];

/// Test function of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum PhantomSpec {
    Gaussian { width: f64 },
    /// Zero-mean difference of Gaussians.
    Dog { width: f64 },
    Shifted { center: Vec<f64>, width: f64 },
    Zero,
    /// Terms (amplitude, width, center row-major).
    Mixture(Vec<(f64, f64, Vec<f64>)>),
}

impl PhantomSpec {
    pub fn build(&self, n: usize, m: usize) -> Result<GaussianMixtureField> {
        let center = |c: &[f64]| -> Result<DMatrix<f64>> {
            if c.len() != n * m {
                return Err(Error::Dimension(format!("center needs {} entries, got {}", n * m, c.len())));
            }
            Ok(DMatrix::from_row_slice(n, m, c))
        };
        Ok(match self {
            PhantomSpec::Gaussian { width } => GaussianMixtureField::gaussian(n, m, *width),
            PhantomSpec::Dog { width } => GaussianMixtureField::dog(n, m, *width),
            PhantomSpec::Shifted { center: c, width } => GaussianMixtureField::shifted_gaussian(center(c)?, *width),
            PhantomSpec::Zero => GaussianMixtureField::zero(n, m),
            PhantomSpec::Mixture(terms) => {
                let terms = terms.iter().map(|(a, w, c)| Ok(GaussianTerm::new(Complex64::new(*a, 0.0), center(c)?, *w))).collect::<Result<Vec<_>>>()?;
                GaussianMixtureField::new(n, m, terms)?
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhantomSpec::Gaussian { .. } => "gaussian",
            PhantomSpec::Dog { .. } => "dog",
            PhantomSpec::Shifted { .. } => "shifted",
            PhantomSpec::Zero => "zero",
            PhantomSpec::Mixture(_) => "mixture",
        }
    }
}

/// Pass/fail thresholds. Defaults are the acceptance tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Multiple of the combined standard error for Monte Carlo comparisons.
    pub se_factor: f64,
    pub parseval: f64,
    pub polar: f64,
    pub projection_slice: f64,
    pub projection_slice_grid: f64,
    pub calderon: f64,
    pub calderon_spectral: f64,
    pub riesz_inversion: f64,
    pub riesz_inversion_spectral: f64,
    pub radon: f64,
    pub radon_spectral: f64,
    pub ridgelet: f64,
    /// Definition path against multiplier path on the same lattice.
    pub cross_check: f64,
    pub ridgelet_identity: f64,
    /// Absolute rise of the relative L² error allowed between successive
    /// steps after capture.
    pub monotone_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            se_factor: 3.0,
            parseval: 1e-10,
            polar: 1e-2,
            projection_slice: 1e-10,
            projection_slice_grid: 1e-4,
            calderon: 1e-3,
            calderon_spectral: 5e-2,
            riesz_inversion: 1e-2,
            riesz_inversion_spectral: 5e-2,
            radon: 5e-2,
            radon_spectral: 1e-1,
            ridgelet: 5e-2,
            cross_check: 1e-6,
            ridgelet_identity: 1e-10,
            monotone_slack: 1e-3,
        }
    }
}

impl Tolerances {
    fn fields(&mut self) -> [(&'static str, &mut f64); 15] {
        [
            ("se_factor", &mut self.se_factor),
            ("parseval", &mut self.parseval),
            ("polar", &mut self.polar),
            ("projection_slice", &mut self.projection_slice),
            ("projection_slice_grid", &mut self.projection_slice_grid),
            ("calderon", &mut self.calderon),
            ("calderon_spectral", &mut self.calderon_spectral),
            ("riesz_inversion", &mut self.riesz_inversion),
            ("riesz_inversion_spectral", &mut self.riesz_inversion_spectral),
            ("radon", &mut self.radon),
            ("radon_spectral", &mut self.radon_spectral),
            ("ridgelet", &mut self.ridgelet),
            ("cross_check", &mut self.cross_check),
            ("ridgelet_identity", &mut self.ridgelet_identity),
            ("monotone_slack", &mut self.monotone_slack),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
    pub phantom: PhantomSpec,
    /// Wavelet spec the band was read from; `constants` writes back to it.
    pub wavelet_file: Option<PathBuf>,
    pub delta: f64,
    pub lambda: f64,
    pub bump_degree: u8,
    /// The second ridgelet wavelet is the first dilated by this factor.
    pub partner_dilation: f64,
    pub steps: usize,
    pub ratio: f64,
    pub resolution: usize,
    /// Eigenvalue resolution of the spectral (off-lattice) error integrals.
    pub spectral_resolution: usize,
    pub seed: u64,
    pub samples: usize,
    /// Random frames for Monte Carlo dual transforms.
    pub frames: usize,
    /// Random (ξ, b) or function pairs per identity check.
    pub pairs: usize,
    pub grid_points: usize,
    pub grid_extent: f64,
    pub slice_points: usize,
    /// Quadrature frames of the lattice Radon inversions.
    pub radon_frames: usize,
    /// Scalar scale a = c·I of the wavelet and ridgelet transforms.
    pub scale: f64,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2,
            m: 1,
            k: 1,
            alpha: 0.5,
            phantom: PhantomSpec::Dog { width: 1.0 },
            wavelet_file: None,
            delta: 0.25,
            lambda: 4.0,
            bump_degree: 5,
            partner_dilation: 1.5,
            steps: 10,
            ratio: 4.0,
            resolution: 128,
            spectral_resolution: 48,
            seed: 20240611,
            samples: 100_000,
            frames: 20_000,
            pairs: 20,
            grid_points: 64,
            grid_extent: 8.0,
            slice_points: 48,
            radon_frames: 512,
            scale: 1.0,
            tolerances: Tolerances::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// Defaults at the given dimensions.
    pub fn with_dims(n: usize, m: usize, k: usize, alpha: f64) -> Self {
        ExperimentConfig { n, m, k, alpha, ..Default::default() }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text)?, None)
    }

    /// Relative `wavelet.file` and `output.dir` paths resolve against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config { line: 0, key: path.display().to_string(), message: e.to_string() })?;
        Self::from_key_values(&KeyValues::parse(&text)?, path.parent())
    }

    fn from_key_values(kv: &KeyValues, base: Option<&Path>) -> Result<Self> {
        for key in kv.keys() {
            if !KNOWN_KEYS.contains(&key) && !key.starts_with("tolerances.") {
                return Err(kv.error(key, "unknown key"));
            }
        }
        let d = ExperimentConfig::default();
        let n = kv.get("dimensions.n", d.n)?;
        let m = kv.get("dimensions.m", d.m)?;
        let k = kv.get("dimensions.k", d.k)?;
        let alpha = kv.get("dimensions.alpha", d.alpha)?;
        if let Err(e) = OrderParams::real(n, m, k, alpha) {
            return Err(kv.error(if kv.contains("dimensions.m") { "dimensions.m" } else { "dimensions.n" }, e.to_string()));
        }
        // n = m leaves no plane codimension; k only matters once it is given
        if kv.contains("dimensions.k") || n > m {
            check_plane_codim(n, m, k).map_err(|e| kv.error(if kv.contains("dimensions.k") { "dimensions.k" } else { "dimensions.n" }, e.to_string()))?;
        }

        let width = kv.get("phantom.width", 1.0)?;
        if !(width > 0.0) {
            return Err(kv.error("phantom.width", "width must be positive"));
        }
        let phantom = match kv.get_str("phantom.kind", d.phantom.name()).as_str() {
            "gaussian" => PhantomSpec::Gaussian { width },
            "dog" => PhantomSpec::Dog { width },
            "zero" => PhantomSpec::Zero,
            "shifted" => {
                let center = kv.get_lists("phantom.center")?.pop().ok_or_else(|| kv.error("phantom.kind", "shifted phantom needs phantom.center"))?;
                if center.len() != n * m {
                    return Err(kv.error("phantom.center", format!("expected {} entries (n·m)", n * m)));
                }
                PhantomSpec::Shifted { center, width }
            }
            "mixture" => {
                let mut terms = Vec::new();
                for t in kv.get_lists("phantom.term")? {
                    if t.len() != 2 + n * m || !(t[1] > 0.0) {
                        return Err(kv.error("phantom.term", format!("expected amplitude, width > 0 and {} center entries", n * m)));
                    }
                    terms.push((t[0], t[1], t[2..].to_vec()));
                }
                if terms.is_empty() {
                    return Err(kv.error("phantom.kind", "mixture phantom needs phantom.term lines"));
                }
                PhantomSpec::Mixture(terms)
            }
            other => return Err(kv.error("phantom.kind", format!("unknown phantom `{other}`"))),
        };

        let (mut delta, mut lambda, mut bump_degree) = (d.delta, d.lambda, d.bump_degree);
        let mut wavelet_file = None;
        if kv.contains("wavelet.file") {
            let mut p = PathBuf::from(kv.get_str("wavelet.file", ""));
            if let (true, Some(b)) = (p.is_relative(), base) {
                p = b.join(p);
            }
            let spec = WaveletSpec::load(&p).map_err(|e| kv.error("wavelet.file", e.to_string()))?;
            if spec.m != m {
                return Err(kv.error("wavelet.file", format!("wavelet is for m = {}, config has m = {m}", spec.m)));
            }
            (delta, lambda, bump_degree) = (spec.delta, spec.lambda, spec.bump_degree);
            wavelet_file = Some(p);
        }
        delta = kv.get("wavelet.delta", delta)?;
        lambda = kv.get("wavelet.lambda", lambda)?;
        bump_degree = kv.get("wavelet.bump_degree", bump_degree)?;
        Band::new(delta, lambda, bump_degree).map_err(|e| kv.error(if kv.contains("wavelet.delta") { "wavelet.delta" } else { "wavelet.lambda" }, e.to_string()))?;
        let partner_dilation = kv.get("wavelet.partner_dilation", d.partner_dilation)?;
        if !(partner_dilation > 0.0) {
            return Err(kv.error("wavelet.partner_dilation", "dilation must be positive"));
        }

        let steps = kv.get("schedule.steps", d.steps)?;
        let ratio = kv.get("schedule.ratio", d.ratio)?;
        let resolution = kv.get("schedule.resolution", d.resolution)?;
        TruncationSchedule::geometric(steps, ratio, resolution).map_err(|e| kv.error("schedule.steps", e.to_string()))?;
        let spectral_resolution = kv.get("schedule.spectral_resolution", d.spectral_resolution)?;

        let samples = kv.get("sampling.samples", d.samples)?;
        let frames = kv.get("sampling.frames", d.frames)?;
        let pairs = kv.get("sampling.pairs", d.pairs)?;
        for (key, v) in [("sampling.samples", samples), ("sampling.frames", frames), ("sampling.pairs", pairs)] {
            if v == 0 {
                return Err(kv.error(key, "must be positive"));
            }
        }

        let grid_points = kv.get("grid.points", d.grid_points)?;
        let grid_extent = kv.get("grid.extent", d.grid_extent)?;
        let slice_points = kv.get("grid.slice_points", d.slice_points)?;
        let radon_frames = kv.get("grid.radon_frames", d.radon_frames)?;
        for (key, p) in [("grid.points", grid_points), ("grid.slice_points", slice_points)] {
            if p < 4 || p % 2 != 0 {
                return Err(kv.error(key, "grid points must be even and at least 4"));
            }
        }
        if !(grid_extent > 0.0) {
            return Err(kv.error("grid.extent", "extent must be positive"));
        }

        let mut tolerances = Tolerances::default();
        for (name, slot) in tolerances.fields() {
            let key = format!("tolerances.{name}");
            *slot = kv.get(&key, *slot)?;
            if !(*slot >= 0.0) {
                return Err(kv.error(&key, "tolerance must be non-negative"));
            }
        }
        for key in kv.keys().filter(|k| k.starts_with("tolerances.")) {
            if !Tolerances::default().fields().iter().any(|(n, _)| key == format!("tolerances.{n}")) {
                return Err(kv.error(key, "unknown tolerance"));
            }
        }

        let scale = kv.get("transform.scale", d.scale)?;
        if !(scale > 0.0) {
            return Err(kv.error("transform.scale", "scale must be positive"));
        }

        let mut out_dir = PathBuf::from(kv.get_str("output.dir", "out"));
        if let (true, Some(b)) = (out_dir.is_relative(), base) {
            out_dir = b.join(out_dir);
        }

        Ok(ExperimentConfig {
            n,
            m,
            k,
            alpha,
            phantom,
            wavelet_file,
            delta,
            lambda,
            bump_degree,
            partner_dilation,
            steps,
            ratio,
            resolution,
            spectral_resolution,
            seed: kv.get("sampling.seed", d.seed)?,
            samples,
            frames,
            pairs,
            grid_points,
            grid_extent,
            slice_points,
            radon_frames,
            scale,
            tolerances,
            out_dir,
        })
    }

    pub fn params(&self) -> Result<OrderParams> {
        OrderParams::real(self.n, self.m, self.k, self.alpha)
    }

    pub fn alpha_c(&self) -> Complex64 {
        Complex64::new(self.alpha, 0.0)
    }

    pub fn phantom_field(&self) -> Result<GaussianMixtureField> {
        self.phantom.build(self.n, self.m)
    }

    /// The band wavelet on M_{rows,m}.
    pub fn wavelet(&self, rows: usize) -> Result<SpectralWavelet> {
        SpectralWavelet::new(rows, self.m, vec![Band::new(self.delta, self.lambda, self.bump_degree)?], 1.0)
    }

    pub fn schedule(&self) -> Result<TruncationSchedule> {
        TruncationSchedule::geometric(self.steps, self.ratio, self.resolution)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.n, self.m, self.grid_points, self.grid_extent)
    }

    /// Lattices are used up to three real dimensions; beyond that the
    /// reconstructions are measured on the Fourier side.
    pub fn on_lattice(&self) -> bool {
        self.n * self.m <= 3
    }
}
