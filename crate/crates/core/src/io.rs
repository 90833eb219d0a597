//! JSON fixtures and run reports.
//!
//! Complex numbers are `[re, im]` pairs; tensors and matrices are row-major.

use crate::error::{Error, Result};
use crate::gibbs::ChainHamiltonian;
use crate::lattice::Lattice;
use crate::layout::SiteOperator;
use crate::linalg::c64;
use crate::peps::{Mps, PepsModel, AXES};
use crate::tensor::{Axis, LabeledTensor};
use faer::Mat;
use serde::{Deserialize, Serialize};

pub const FIXTURE_SCHEMA: &str = "pepsbound.fixture.v1";
pub const REPORT_SCHEMA: &str = "pepsbound.report.v1";

pub type Complex = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorData {
    pub labels: Vec<String>,
    pub dims: Vec<usize>,
    pub entries: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermData {
    pub sites: Vec<usize>,
    pub dims: Vec<usize>,
    pub matrix: MatrixData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    /// One tensor per site in row-major site order, or a single tensor for every site.
    Peps { rows: usize, cols: usize, tensors: Vec<TensorData> },
    /// Translation-invariant chain: one `D × D` matrix per physical index.
    Mps { matrices: Vec<MatrixData> },
    ChainHamiltonian { site_dims: Vec<usize>, terms: Vec<TermData> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub model: Model,
}

fn finite(entries: &[Complex]) -> Result<()> {
    if entries.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::input("fixture has non-finite entries"));
    }
    Ok(())
}

impl MatrixData {
    pub fn from_mat(m: &Mat<c64>) -> Self {
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                entries.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        MatrixData { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn to_mat(&self) -> Result<Mat<c64>> {
        if self.entries.len() != self.rows * self.cols {
            return Err(Error::dims(format!("{}x{} matrix with {} entries", self.rows, self.cols, self.entries.len())));
        }
        finite(&self.entries)?;
        Ok(Mat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.entries[i * self.cols + j];
            c64::new(re, im)
        }))
    }
}

impl TensorData {
    pub fn from_tensor(t: &LabeledTensor) -> Self {
        TensorData {
            labels: t.axes().iter().map(|a| a.label.clone()).collect(),
            dims: t.dims(),
            entries: t.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<LabeledTensor> {
        if self.labels.len() != self.dims.len() {
            return Err(Error::dims("tensor labels and dims differ in length"));
        }
        finite(&self.entries)?;
        let axes = self.labels.iter().zip(&self.dims).map(|(l, &d)| Axis::new(l.clone(), d)).collect();
        LabeledTensor::new(axes, self.entries.iter().map(|&[re, im]| c64::new(re, im)).collect())
    }
}

impl FixtureFile {
    pub fn new(name: impl Into<String>, seed: Option<u64>, model: Model) -> Self {
        FixtureFile { schema: FIXTURE_SCHEMA.into(), name: Some(name.into()), seed, model }
    }

    pub fn from_peps(name: &str, model: &PepsModel) -> Self {
        let tensors = model.tensors().iter().map(TensorData::from_tensor).collect();
        Self::new(name, None, Model::Peps { rows: model.lattice.rows, cols: model.lattice.cols, tensors })
    }

    pub fn from_mps(name: &str, mps: &Mps) -> Self {
        Self::new(name, None, Model::Mps { matrices: mps.matrices.iter().map(MatrixData::from_mat).collect() })
    }

    pub fn from_chain(name: &str, h: &ChainHamiltonian) -> Self {
        let terms = h
            .terms
            .iter()
            .map(|t| TermData { sites: t.sites.clone(), dims: t.dims.clone(), matrix: MatrixData::from_mat(&t.matrix) })
            .collect();
        Self::new(name, None, Model::ChainHamiltonian { site_dims: h.site_dims.clone(), terms })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let f: FixtureFile = serde_json::from_str(text)?;
        if f.schema != FIXTURE_SCHEMA {
            return Err(Error::input(format!("unknown fixture schema {:?}, expected {FIXTURE_SCHEMA}", f.schema)));
        }
        f.validate()?;
        Ok(f)
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.model {
            Model::Peps { .. } => self.peps().map(|_| ()),
            Model::Mps { .. } => self.mps().map(|_| ()),
            Model::ChainHamiltonian { .. } => self.chain().map(|_| ()),
        }
    }

    pub fn peps(&self) -> Result<PepsModel> {
        match &self.model {
            Model::Peps { rows, cols, tensors } => {
                let lattice = Lattice::new(*rows, *cols);
                let ts = tensors.iter().map(|t| t.to_tensor()).collect::<Result<Vec<_>>>()?;
                for t in &ts {
                    if t.axes().len() != AXES.len() || AXES.iter().any(|a| t.position(a).is_none()) {
                        return Err(Error::input(format!("PEPS tensors need axes {AXES:?}")));
                    }
                }
                if ts.len() == 1 {
                    PepsModel::uniform(lattice, ts.into_iter().next().unwrap())
                } else {
                    PepsModel::new(lattice, ts)
                }
            }
            _ => Err(Error::input("fixture is not a PEPS")),
        }
    }

    pub fn mps(&self) -> Result<Mps> {
        match &self.model {
            Model::Mps { matrices } => Mps::new(matrices.iter().map(|m| m.to_mat()).collect::<Result<Vec<_>>>()?),
            _ => Err(Error::input("fixture is not an MPS")),
        }
    }

    pub fn chain(&self) -> Result<ChainHamiltonian> {
        match &self.model {
            Model::ChainHamiltonian { site_dims, terms } => {
                let ts = terms
                    .iter()
                    .map(|t| SiteOperator::new(t.sites.clone(), t.dims.clone(), t.matrix.to_mat()?))
                    .collect::<Result<Vec<_>>>()?;
                ChainHamiltonian::new(site_dims.clone(), ts)
            }
            _ => Err(Error::input("fixture is not a chain Hamiltonian")),
        }
    }
}

/// Comparison of a measured number against a bound: `measured ≤ bound + tolerance`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Checks that only report (for example outside a theorem's hypothesis) do not affect the exit code.
    pub asserted: bool,
    /// What the bound is: `identity`, `inequality`, `empirical` or `fixture`.
    pub source: &'static str,
}

impl Check {
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, tolerance: f64, source: &'static str) -> Self {
        let pass = measured <= bound + tolerance;
        Check { name: name.into(), measured, bound, tolerance, pass, asserted: true, source }
    }

    /// `measured ≤ tolerance`.
    pub fn zero(name: impl Into<String>, measured: f64, tolerance: f64, source: &'static str) -> Self {
        Self::new(name, measured, 0.0, tolerance, source)
    }

    /// A condition without a natural number attached: measured 0 on success, 1 on failure.
    pub fn holds(name: impl Into<String>, ok: bool, source: &'static str) -> Self {
        Self::new(name, if ok { 0.0 } else { 1.0 }, 0.0, 0.0, source)
    }

    pub fn reported(mut self) -> Self {
        self.asserted = false;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
    pub timing_ms: f64,
}

impl RunReport {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunReport {
            schema: REPORT_SCHEMA,
            command: command.into(),
            config,
            checks: Vec::new(),
            data: serde_json::Value::Object(Default::default()),
            timing_ms: 0.0,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn put(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        let v = serde_json::to_value(value)?;
        if let serde_json::Value::Object(m) = &mut self.data {
            m.insert(key.to_string(), v);
        }
        Ok(())
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.asserted).all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One row of a plotted series.
#[derive(Clone, Debug, Serialize)]
pub struct SeriesRow {
    pub ell: usize,
    pub measured: f64,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

/// CSV with columns `ℓ, measured, bound, pass`; missing values are left empty.
pub fn series_csv(rows: &[SeriesRow]) -> String {
    let mut s = String::from("ell,measured,bound,pass\n");
    for r in rows {
        let b = r.bound.map(|b| format!("{b:e}")).unwrap_or_default();
        let p = r.pass.map(|p| p.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{:e},{},{}\n", r.ell, r.measured, b, p));
    }
    s
}
