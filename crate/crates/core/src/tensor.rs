//! Dense complex tensors with named axes.
//!
//! Storage is row-major: the last axis varies fastest.

use crate::error::{Error, Result};
use crate::linalg::c64;
use faer::Mat;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub dim: usize,
}

impl Axis {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Axis { label: label.into(), dim }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledTensor {
    axes: Vec<Axis>,
    data: Vec<c64>,
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

impl LabeledTensor {
    pub fn new(axes: Vec<Axis>, data: Vec<c64>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for a in &axes {
            if !seen.insert(a.label.as_str()) {
                return Err(Error::DuplicateLabel(a.label.clone()));
            }
        }
        let size: usize = axes.iter().map(|a| a.dim).product();
        if size != data.len() {
            return Err(Error::dims(format!(
                "axes describe {} entries but {} were given",
                size,
                data.len()
            )));
        }
        Ok(LabeledTensor { axes, data })
    }

    pub fn zeros(axes: Vec<Axis>) -> Result<Self> {
        let size = axes.iter().map(|a| a.dim).product();
        Self::new(axes, vec![c64::new(0.0, 0.0); size])
    }

    /// Rank-zero tensor holding one number.
    pub fn scalar(value: c64) -> Self {
        LabeledTensor { axes: Vec::new(), data: vec![value] }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn data(&self) -> &[c64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [c64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<c64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.axes.iter().map(|a| a.label.as_str()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.label == label)
    }

    fn require(&self, label: &str) -> Result<usize> {
        self.position(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.axes[self.require(label)?].dim)
    }

    pub fn get(&self, index: &[usize]) -> c64 {
        let s = strides(&self.dims());
        self.data[index.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()]
    }

    pub fn relabel(&mut self, from: &str, to: &str) -> Result<()> {
        let p = self.require(from)?;
        if from != to && self.position(to).is_some() {
            return Err(Error::DuplicateLabel(to.to_string()));
        }
        self.axes[p].label = to.to_string();
        Ok(())
    }

    pub fn relabeled(mut self, map: impl Fn(&str) -> String) -> Result<Self> {
        let axes: Vec<Axis> =
            self.axes.iter().map(|a| Axis::new(map(&a.label), a.dim)).collect();
        self = Self::new(axes, self.data)?;
        Ok(self)
    }

    /// Reorders axes so that they appear in the order given by `labels`.
    pub fn permuted(&self, labels: &[&str]) -> Result<Self> {
        if labels.len() != self.axes.len() {
            return Err(Error::dims(format!(
                "permutation lists {} labels for a rank-{} tensor",
                labels.len(),
                self.axes.len()
            )));
        }
        let perm: Vec<usize> =
            labels.iter().map(|l| self.require(l)).collect::<Result<_>>()?;
        let mut uniq = perm.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != perm.len() {
            return Err(Error::DuplicateLabel(labels.join(",")));
        }
        Ok(self.permute_axes(&perm))
    }

    /// New tensor whose axis `k` is the old axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        let axes: Vec<Axis> = perm.iter().map(|&p| self.axes[p].clone()).collect();
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return LabeledTensor { axes, data: self.data.clone() };
        }
        let old_strides = strides(&self.dims());
        let new_dims: Vec<usize> = axes.iter().map(|a| a.dim).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let n = self.data.len();
        let mut out = Vec::with_capacity(n);
        if n > 0 {
            let r = new_dims.len();
            let mut idx = vec![0usize; r];
            let mut off = 0usize;
            let last = r - 1;
            let inner = new_dims[last];
            let inner_stride = src_strides[last];
            loop {
                let mut o = off;
                for _ in 0..inner {
                    out.push(self.data[o]);
                    o += inner_stride;
                }
                // advance the outer multi-index
                let mut k = last;
                loop {
                    if k == 0 {
                        return LabeledTensor { axes, data: out };
                    }
                    k -= 1;
                    idx[k] += 1;
                    off += src_strides[k];
                    if idx[k] < new_dims[k] {
                        break;
                    }
                    off -= src_strides[k] * new_dims[k];
                    idx[k] = 0;
                }
            }
        }
        LabeledTensor { axes, data: out }
    }

    /// Matrix view with the given row and column labels (each group in order).
    pub fn to_matrix(&self, rows: &[&str], cols: &[&str]) -> Result<Mat<c64>> {
        let order: Vec<&str> = rows.iter().chain(cols.iter()).copied().collect();
        let p = self.permuted(&order)?;
        let nr: usize = rows.iter().map(|l| p.dim_of(l).unwrap()).product();
        let nc: usize = cols.iter().map(|l| p.dim_of(l).unwrap()).product();
        Ok(Mat::from_fn(nr, nc, |i, j| p.data[i * nc + j]))
    }

    /// Builds a tensor from a matrix whose rows and columns are the given axis groups.
    pub fn from_matrix(m: &Mat<c64>, rows: Vec<Axis>, cols: Vec<Axis>) -> Result<Self> {
        let nr: usize = rows.iter().map(|a| a.dim).product();
        let nc: usize = cols.iter().map(|a| a.dim).product();
        if nr != m.nrows() || nc != m.ncols() {
            return Err(Error::dims(format!(
                "matrix is {}x{}, axes describe {}x{}",
                m.nrows(),
                m.ncols(),
                nr,
                nc
            )));
        }
        let mut data = Vec::with_capacity(nr * nc);
        for i in 0..nr {
            for j in 0..nc {
                data.push(m[(i, j)]);
            }
        }
        Self::new(rows.into_iter().chain(cols).collect(), data)
    }

    pub fn conj(&self) -> Self {
        LabeledTensor { axes: self.axes.clone(), data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&mut self, s: c64) {
        for z in &mut self.data {
            *z *= s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Merges adjacent-or-not axes into one new axis, placed last.
    pub fn fuse(&self, labels: &[&str], new_label: &str) -> Result<Self> {
        let rest: Vec<&str> = self
            .axes
            .iter()
            .map(|a| a.label.as_str())
            .filter(|l| !labels.contains(l))
            .collect();
        let order: Vec<&str> = rest.iter().chain(labels.iter()).copied().collect();
        let p = self.permuted(&order)?;
        let dim: usize = labels.iter().map(|l| p.dim_of(l).unwrap()).product();
        let mut axes: Vec<Axis> = p.axes[..rest.len()].to_vec();
        axes.push(Axis::new(new_label, dim));
        Self::new(axes, p.data)
    }
}

/// Contracts `a` and `b` over the listed `(label_in_a, label_in_b)` pairs.
///
/// The result carries the free axes of `a` followed by the free axes of `b`.
pub fn contract(a: &LabeledTensor, b: &LabeledTensor, pairs: &[(&str, &str)]) -> Result<LabeledTensor> {
    let mut pa = Vec::with_capacity(pairs.len());
    let mut pb = Vec::with_capacity(pairs.len());
    for (la, lb) in pairs {
        let ia = a.require(la)?;
        let ib = b.require(lb)?;
        if a.axes[ia].dim != b.axes[ib].dim {
            return Err(Error::dims(format!(
                "cannot pair `{}` (dim {}) with `{}` (dim {})",
                la, a.axes[ia].dim, lb, b.axes[ib].dim
            )));
        }
        if pa.contains(&ia) || pb.contains(&ib) {
            return Err(Error::DuplicateLabel(format!("{la}/{lb}")));
        }
        pa.push(ia);
        pb.push(ib);
    }
    let free_a: Vec<usize> = (0..a.axes.len()).filter(|i| !pa.contains(i)).collect();
    let free_b: Vec<usize> = (0..b.axes.len()).filter(|i| !pb.contains(i)).collect();
    for &i in &free_a {
        if free_b.iter().any(|&j| b.axes[j].label == a.axes[i].label) {
            return Err(Error::DuplicateLabel(a.axes[i].label.clone()));
        }
    }
    let perm_a: Vec<usize> = free_a.iter().chain(pa.iter()).copied().collect();
    let perm_b: Vec<usize> = pb.iter().chain(free_b.iter()).copied().collect();
    let ta = a.permute_axes(&perm_a);
    let tb = b.permute_axes(&perm_b);
    let m: usize = free_a.iter().map(|&i| a.axes[i].dim).product();
    let k: usize = pa.iter().map(|&i| a.axes[i].dim).product();
    let n: usize = free_b.iter().map(|&i| b.axes[i].dim).product();
    let ma = faer::MatRef::from_row_major_slice(&ta.data, m, k);
    let mb = faer::MatRef::from_row_major_slice(&tb.data, k, n);
    let mut out = vec![c64::new(0.0, 0.0); m * n];
    {
        let mc = faer::MatMut::from_row_major_slice_mut(&mut out, m, n);
        faer::linalg::matmul::matmul(
            mc,
            faer::Accum::Replace,
            ma,
            mb,
            c64::new(1.0, 0.0),
            faer::get_global_parallelism(),
        );
    }
    let axes: Vec<Axis> = free_a
        .iter()
        .map(|&i| a.axes[i].clone())
        .chain(free_b.iter().map(|&j| b.axes[j].clone()))
        .collect();
    LabeledTensor::new(axes, out)
}

/// Contracts every label the two tensors share.
pub fn contract_common(a: &LabeledTensor, b: &LabeledTensor) -> Result<LabeledTensor> {
    let shared: Vec<String> = a
        .axes
        .iter()
        .filter(|x| b.position(&x.label).is_some())
        .map(|x| x.label.clone())
        .collect();
    let pairs: Vec<(&str, &str)> = shared.iter().map(|s| (s.as_str(), s.as_str())).collect();
    contract(a, b, &pairs)
}
