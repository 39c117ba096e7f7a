//! RankMe effective rank of embedding sets, per-magnification profiles and
//! centroid cosine similarities.
//!
//! `RankMe(Z) = exp(−Σ_k p_k log p_k)` over the `min(N, K)` singular values of
//! `Z`, with `p_k = σ_k / ‖σ‖₁ + ε`. The `p_k` are used as written, without
//! renormalizing after adding `ε`, so the result carries a small explicit
//! `O(ε log ε)` bias.

use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-7;
pub const DEFAULT_GROUP_TOLERANCE: f64 = 1e-6;

pub const BINARY_MAGIC: &[u8; 4] = b"MSEB";
pub const BINARY_VERSION: u16 = 1;

/// `N × K` embeddings, each row tagged with an id and its source mpp.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    ids: Vec<String>,
    mpps: Vec<f64>,
    dim: usize,
    /// Row-major `N × K`.
    data: Vec<f64>,
}

impl EmbeddingSet {
    pub fn new(ids: Vec<String>, mpps: Vec<f64>, dim: usize, data: Vec<f64>) -> Result<Self> {
        let n = mpps.len();
        if n == 0 {
            return Err(Error::Validation("embedding set is empty".into()));
        }
        if dim == 0 {
            return Err(Error::Validation("embedding dimension must be at least 1".into()));
        }
        if ids.len() != n {
            return Err(Error::Shape(format!("{} ids for {n} rows", ids.len())));
        }
        if data.len() != n * dim {
            return Err(Error::Shape(format!(
                "{n} rows of dimension {dim} need {} values, got {}",
                n * dim,
                data.len()
            )));
        }
        if let Some((i, m)) = mpps.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::Validation(format!("row {i}: mpp must be positive and finite, got {m}")));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("row {}: non-finite embedding value", i / dim)));
        }
        Ok(Self { ids, mpps, dim, data })
    }

    /// Builds a set from rows sharing one mpp; ids are row indices.
    pub fn from_rows(mpp: f64, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("rows have different dimensions".into()));
        }
        Self::new(
            (0..rows.len()).map(|i| i.to_string()).collect(),
            vec![mpp; rows.len()],
            dim,
            rows.concat(),
        )
    }

    pub fn len(&self) -> usize {
        self.mpps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mpps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn mpps(&self) -> &[f64] {
        &self.mpps
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Appends all rows of `other`.
    pub fn extend(&mut self, other: &EmbeddingSet) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::Shape(format!("dimension {} vs {}", self.dim, other.dim)));
        }
        self.ids.extend_from_slice(&other.ids);
        self.mpps.extend_from_slice(&other.mpps);
        self.data.extend_from_slice(&other.data);
        Ok(())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.len(), self.dim, &self.data)
    }

    fn submatrix(&self, rows: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), self.dim, |i, j| self.data[rows[i] * self.dim + j])
    }

    /// Reads either format, sniffing the binary magic.
    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        if bytes.starts_with(BINARY_MAGIC) {
            Self::read_binary(bytes.as_slice(), &name)
        } else {
            Self::read_csv(bytes.as_slice(), &name)
        }
    }

    /// CSV with header `id,mpp,d0,...,d{K-1}`.
    pub fn read_csv(reader: impl Read, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::parse(source_name, 1, e.to_string()))?
            .clone();
        let dim = headers.len().saturating_sub(2);
        let header_ok = headers.get(0) == Some("id")
            && headers.get(1) == Some("mpp")
            && dim >= 1
            && headers.iter().skip(2).enumerate().all(|(k, h)| h == format!("d{k}"));
        if !header_ok {
            return Err(Error::parse(source_name, 1, "expected header id,mpp,d0,d1,..."));
        }
        let (mut ids, mut mpps, mut data) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(source_name, line, e.to_string()))?;
            if rec.len() != dim + 2 {
                return Err(Error::parse(source_name, line, format!("expected {} fields", dim + 2)));
            }
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(source_name, line, format!("not a finite number: {s:?}")))
            };
            let mpp = num(&rec[1])?;
            if mpp <= 0.0 {
                return Err(Error::parse(source_name, line, format!("mpp must be positive, got {mpp}")));
            }
            ids.push(rec[0].to_string());
            mpps.push(mpp);
            for field in rec.iter().skip(2) {
                data.push(num(field)?);
            }
        }
        if mpps.is_empty() {
            return Err(Error::parse(source_name, 1, "no embedding rows"));
        }
        Self::new(ids, mpps, dim, data)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "id,mpp")?;
        for k in 0..self.dim {
            write!(w, ",d{k}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(w, "{},{}", self.ids[i], self.mpps[i])?;
            for v in self.row(i) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Binary layout (little-endian): `MSEB`, `u16` version = 1, `u64` N,
    /// `u32` K, then N records of `f64` mpp followed by K `f32` components.
    /// Ids become row indices.
    pub fn read_binary(mut r: impl Read, source_name: &str) -> Result<Self> {
        let bad = |m: String| Error::parse(source_name, 0, m);
        let mut header = [0u8; 18];
        r.read_exact(&mut header)
            .map_err(|_| bad("truncated binary embedding header".into()))?;
        if &header[..4] != BINARY_MAGIC {
            return Err(bad("missing MSEB magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != BINARY_VERSION {
            return Err(bad(format!("unsupported binary embedding version {version}")));
        }
        let n = u64::from_le_bytes(header[6..14].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(header[14..18].try_into().unwrap()) as usize;
        let record = 8 + 4 * dim;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)
            .map_err(|e| bad(format!("reading payload: {e}")))?;
        if Some(payload.len()) != n.checked_mul(record) {
            return Err(bad(format!(
                "{n} records of dimension {dim} need {} bytes, found {}",
                n.saturating_mul(record),
                payload.len()
            )));
        }
        let mut mpps = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for rec in payload.chunks_exact(record.max(1)) {
            mpps.push(f64::from_le_bytes(rec[..8].try_into().unwrap()));
            data.extend(
                rec[8..]
                    .chunks_exact(4)
                    .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64),
            );
        }
        Self::new((0..n).map(|i| i.to_string()).collect(), mpps, dim, data)
    }

    /// Components are narrowed to `f32`.
    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&BINARY_VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        for i in 0..self.len() {
            w.write_all(&self.mpps[i].to_le_bytes())?;
            for v in self.row(i) {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Row indices grouped by mpp: rows join the current group while within
    /// `tolerance` of the group's smallest mpp. Groups are ascending and rows
    /// are in a canonical order (mpp, then vector, then id), so permuting the
    /// input rows never changes any result.
    pub fn groups(&self, tolerance: f64) -> Result<Vec<(f64, Vec<usize>)>> {
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(Error::Parameter(format!("group tolerance must be >= 0, got {tolerance}")));
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&i, &j| {
            self.mpps[i]
                .total_cmp(&self.mpps[j])
                .then_with(|| {
                    self.row(i)
                        .iter()
                        .zip(self.row(j))
                        .map(|(a, b)| a.total_cmp(b))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .then_with(|| self.ids[i].cmp(&self.ids[j]))
        });
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for i in order {
            let m = self.mpps[i];
            match groups.last_mut() {
                Some((start, rows)) if m - *start <= tolerance => rows.push(i),
                _ => groups.push((m, vec![i])),
            }
        }
        Ok(groups)
    }
}

/// RankMe of a matrix (rows are samples).
pub fn rankme(z: &DMatrix<f64>, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if z.nrows() == 0 || z.ncols() == 0 {
        return Err(Error::Validation("embedding matrix is empty".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("embedding matrix has non-finite entries".into()));
    }
    let sigma = z.singular_values();
    rankme_from_singular_values(sigma.as_slice(), epsilon)
}

/// RankMe of a row-major `rows × cols` slice.
pub fn rankme_row_major(data: &[f64], rows: usize, cols: usize, epsilon: f64) -> Result<f64> {
    if rows.checked_mul(cols) != Some(data.len()) {
        return Err(Error::Shape(format!("{rows}x{cols} matrix needs {} values, got {}", rows.saturating_mul(cols), data.len())));
    }
    rankme(&DMatrix::from_row_slice(rows, cols, data), epsilon)
}

/// RankMe from precomputed singular values.
pub fn rankme_from_singular_values(sigma: &[f64], epsilon: f64) -> Result<f64> {
    let norm: f64 = sigma.iter().map(|s| s.abs()).sum();
    if !(norm > 0.0) {
        return Err(Error::Degenerate("all singular values are zero".into()));
    }
    let h = sigma
        .iter()
        .map(|s| s.abs() / norm + epsilon)
        .filter(|p| *p > 0.0)
        .fold(0.0, |acc, p| acc - p * p.ln());
    Ok(h.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankMeGroup {
    pub mpp: f64,
    pub count: usize,
    pub rankme: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankMeProfile {
    pub groups: Vec<RankMeGroup>,
    pub epsilon: f64,
}

impl RankMeProfile {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "mpp,count,rankme")?;
        for g in &self.groups {
            writeln!(w, "{},{},{}", g.mpp, g.count, g.rankme)?;
        }
        Ok(())
    }
}

pub fn rankme_profile(set: &EmbeddingSet, epsilon: f64, group_tolerance: f64) -> Result<RankMeProfile> {
    let groups = set
        .groups(group_tolerance)?
        .into_iter()
        .map(|(mpp, rows)| {
            if rows.len() < 2 {
                warn!("group at {mpp} mpp has {} row(s); its RankMe is not meaningful", rows.len());
            }
            let z = set.submatrix(&rows);
            let value = rankme(&z, epsilon).map_err(|e| match e {
                Error::Degenerate(m) => Error::Degenerate(format!("group at {mpp} mpp: {m}")),
                other => other,
            })?;
            Ok(RankMeGroup {
                mpp,
                count: rows.len(),
                rankme: value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankMeProfile { groups, epsilon })
}

/// Symmetric matrix of cosine similarities between group centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub mpps: Vec<f64>,
    /// Row-major `g × g`.
    pub values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn size(&self) -> usize {
        self.mpps.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size() + j]
    }

    /// Labeled square matrix: the first row and column hold the group mpps.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        write!(w, "mpp")?;
        for m in &self.mpps {
            write!(w, ",{m}")?;
        }
        writeln!(w)?;
        for (i, m) in self.mpps.iter().enumerate() {
            write!(w, "{m}")?;
            for j in 0..self.size() {
                write!(w, ",{}", self.get(i, j))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn centroid_similarity(set: &EmbeddingSet, group_tolerance: f64) -> Result<SimilarityMatrix> {
    let groups = set.groups(group_tolerance)?;
    let centroids: Vec<(f64, Vec<f64>)> = groups
        .iter()
        .map(|(mpp, rows)| {
            let mut c = vec![0.0; set.dim];
            for &r in rows {
                for (acc, v) in c.iter_mut().zip(set.row(r)) {
                    *acc += v;
                }
            }
            let n = rows.len() as f64;
            c.iter_mut().for_each(|v| *v /= n);
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                return Err(Error::Degenerate(format!("centroid of group at {mpp} mpp is zero")));
            }
            c.iter_mut().for_each(|v| *v /= norm);
            Ok((*mpp, c))
        })
        .collect::<Result<Vec<_>>>()?;

    let g = centroids.len();
    let mut values = vec![0.0; g * g];
    for i in 0..g {
        values[i * g + i] = 1.0;
        for j in i + 1..g {
            let dot: f64 = centroids[i].1.iter().zip(&centroids[j].1).map(|(a, b)| a * b).sum();
            let cos = dot.clamp(-1.0, 1.0);
            values[i * g + j] = cos;
            values[j * g + i] = cos;
        }
    }
    Ok(SimilarityMatrix {
        mpps: centroids.into_iter().map(|(m, _)| m).collect(),
        values,
    })
}

/// Min-max scales every `(profile, mpp)` cell jointly:
/// `v' = (v − min) / (max − min)` over all cells of all profiles.
pub fn minmax_normalize_profiles(profiles: &[RankMeProfile]) -> Result<Vec<Vec<f64>>> {
    if profiles.len() < 2 {
        return Err(Error::Parameter(format!("need at least 2 profiles, got {}", profiles.len())));
    }
    let reference = &profiles[0].groups;
    for p in &profiles[1..] {
        let same_grid = p.groups.len() == reference.len()
            && p.groups.iter().zip(reference).all(|(a, b)| (a.mpp - b.mpp).abs() <= 1e-9);
        if !same_grid {
            return Err(Error::Shape("profiles are not on identical mpp grids".into()));
        }
    }
    let all = profiles.iter().flat_map(|p| p.groups.iter().map(|g| g.rankme));
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return Err(Error::Degenerate("all profile values are equal".into()));
    }
    Ok(profiles
        .iter()
        .map(|p| p.groups.iter().map(|g| (g.rankme - lo) / (hi - lo)).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn profile(values: &[f64]) -> RankMeProfile {
        RankMeProfile {
            groups: values
                .iter()
                .enumerate()
                .map(|(i, v)| RankMeGroup {
                    mpp: 0.25 * (i + 1) as f64,
                    count: 10,
                    rankme: *v,
                })
                .collect(),
            epsilon: DEFAULT_EPSILON,
        }
    }

    #[test]
    fn rank_one_matrix() {
        let z = DMatrix::from_fn(30, 8, |i, j| (i as f64 + 1.0) * (j as f64 - 3.5));
        assert_abs_diff_eq!(rankme(&z, DEFAULT_EPSILON).unwrap(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn identity_has_full_rank() {
        let z = DMatrix::<f64>::identity(6, 6);
        assert_abs_diff_eq!(rankme(&z, 0.0).unwrap(), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert!(matches!(rankme(&DMatrix::zeros(4, 3), 1e-7), Err(Error::Degenerate(_))));
        let mut z = DMatrix::<f64>::identity(3, 3);
        z[(1, 1)] = f64::NAN;
        assert!(matches!(rankme(&z, 1e-7), Err(Error::Validation(_))));
        assert!(rankme(&DMatrix::<f64>::identity(3, 3), -1.0).is_err());
    }

    #[test]
    fn epsilon_is_added_without_renormalization() {
        // Two equal singular values: p = 0.5 + ε each.
        let eps = 1e-3;
        let p: f64 = 0.5 + eps;
        let expect = (-2.0 * p * p.ln()).exp();
        assert_abs_diff_eq!(rankme_from_singular_values(&[3.0, 3.0], eps).unwrap(), expect, epsilon = 1e-15);
    }

    #[test]
    fn grouping_and_counts() {
        let mut rows = Vec::new();
        let mut mpps = Vec::new();
        for (m, count) in [(0.5, 100), (0.25, 100)] {
            for i in 0..count {
                rows.push(vec![i as f64, (i * i) as f64 % 7.0, 1.0]);
                mpps.push(m);
            }
        }
        let set = EmbeddingSet::new(
            (0..200).map(|i| format!("p{i}")).collect(),
            mpps,
            3,
            rows.concat(),
        )
        .unwrap();
        let p = rankme_profile(&set, DEFAULT_EPSILON, DEFAULT_GROUP_TOLERANCE).unwrap();
        assert_eq!(p.groups.len(), 2);
        assert_eq!((p.groups[0].mpp, p.groups[0].count), (0.25, 100));
        assert_eq!((p.groups[1].mpp, p.groups[1].count), (0.5, 100));
    }

    #[test]
    fn duplicated_vectors_give_rank_one() {
        let set = EmbeddingSet::from_rows(1.0, &vec![vec![0.3, -1.0, 2.0, 0.0]; 20]).unwrap();
        let p = rankme_profile(&set, DEFAULT_EPSILON, DEFAULT_GROUP_TOLERANCE).unwrap();
        assert_abs_diff_eq!(p.groups[0].rankme, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn single_row_group_is_allowed() {
        let set = EmbeddingSet::from_rows(0.5, &[vec![1.0, 2.0]]).unwrap();
        let p = rankme_profile(&set, DEFAULT_EPSILON, DEFAULT_GROUP_TOLERANCE).unwrap();
        assert_abs_diff_eq!(p.groups[0].rankme, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn group_tolerance() {
        let set = EmbeddingSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.5, 0.5 + 5e-7, 0.5 + 2e-6],
            1,
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        let g = set.groups(1e-6).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].1, vec![0, 1]);
        assert_eq!(g[0].0, 0.5);
        assert!(set.groups(-1.0).is_err());
    }

    #[test]
    fn centroid_cosines() {
        let s = 0.5f64.sqrt();
        let set = EmbeddingSet::new(
            vec!["1".into(), "2".into(), "3".into(), "4".into()],
            vec![0.25, 0.5, 1.0, 1.0],
            2,
            vec![2.0, 0.0, s, s, 0.0, 1.0, 0.0, 3.0],
        )
        .unwrap();
        let m = centroid_similarity(&set, DEFAULT_GROUP_TOLERANCE).unwrap();
        assert_eq!(m.size(), 3);
        assert_abs_diff_eq!(m.get(0, 1), s, epsilon = 1e-12);
        assert_abs_diff_eq!(m.get(1, 2), s, epsilon = 1e-12);
        assert_abs_diff_eq!(m.get(0, 2), 0.0, epsilon = 1e-12);
        for i in 0..3 {
            assert_eq!(m.get(i, i), 1.0);
            for j in 0..3 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn identical_and_zero_centroids() {
        let set = EmbeddingSet::new(vec!["a".into(), "b".into()], vec![0.5, 1.0], 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let m = centroid_similarity(&set, DEFAULT_GROUP_TOLERANCE).unwrap();
        assert_abs_diff_eq!(m.get(0, 1), 1.0, epsilon = 1e-12);
        let zero = EmbeddingSet::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![0.5, 1.0, 1.0],
            1,
            vec![1.0, 1.0, -1.0],
        )
        .unwrap();
        match centroid_similarity(&zero, DEFAULT_GROUP_TOLERANCE) {
            Err(Error::Degenerate(m)) => assert!(m.contains("1 mpp"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn minmax_normalization() {
        let out = minmax_normalize_profiles(&[profile(&[1.0, 3.0]), profile(&[2.0, 4.0])]).unwrap();
        assert_abs_diff_eq!(out[0][0], 0.0);
        assert_abs_diff_eq!(out[0][1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1][0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1][1], 1.0);
        assert!(matches!(
            minmax_normalize_profiles(&[profile(&[2.0, 2.0]), profile(&[2.0, 2.0])]),
            Err(Error::Degenerate(_))
        ));
        assert!(minmax_normalize_profiles(&[profile(&[1.0])]).is_err());
        assert!(minmax_normalize_profiles(&[profile(&[1.0]), profile(&[1.0, 2.0])]).is_err());
    }

    #[test]
    fn csv_and_binary_io() {
        let set = EmbeddingSet::new(
            vec!["x".into(), "y".into()],
            vec![0.25, 2.0],
            3,
            vec![1.0, -0.5, 0.25, 3.0, 0.0, -2.0],
        )
        .unwrap();
        let mut csv = Vec::new();
        set.write_csv(&mut csv).unwrap();
        assert!(csv.starts_with(b"id,mpp,d0,d1,d2\n"));
        assert_eq!(EmbeddingSet::read_csv(csv.as_slice(), "e.csv").unwrap(), set);

        let mut bin = Vec::new();
        set.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 18 + 2 * (8 + 12));
        let back = EmbeddingSet::read_binary(bin.as_slice(), "e.bin").unwrap();
        assert_eq!(back.ids(), &["0".to_string(), "1".to_string()]);
        assert_eq!(back.mpps(), set.mpps());
        assert_eq!(back.row(1), set.row(1));
        assert!(EmbeddingSet::read_binary(&bin[..bin.len() - 2], "e.bin").is_err());

        for bad in ["id,mpp\n", "id,mpp,d1\na,1,2\n", "id,mpp,d0\na,0,2\n", "id,mpp,d0\na,1,x\n", "id,mpp,d0\n"] {
            assert!(EmbeddingSet::read_csv(bad.as_bytes(), "e").is_err(), "{bad:?}");
        }
    }
}
