//! Helpers shared by the integration tests: fixtures, random generators and
//! independent oracles.
#![allow(dead_code)]

use magsample::kernels::TabulatedKernel;
use magsample::{KernelSpec, MagRange, SamplingDistribution};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub const STANDARD_MPPS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

pub fn range() -> MagRange {
    MagRange::default()
}

pub fn du() -> SamplingDistribution {
    SamplingDistribution::discrete_uniform(range(), &STANDARD_MPPS).unwrap()
}

pub fn cu() -> SamplingDistribution {
    SamplingDistribution::continuous_uniform(range(), 1000).unwrap()
}

pub fn builtin_kernels() -> [KernelSpec; 2] {
    [KernelSpec::AbsDistance, KernelSpec::InfoOverlap]
}

/// Strictly decreasing, positive profile `f(d)` on `d ∈ [0, 1.75]`, drawn
/// from one of several families.
pub fn random_decreasing_profile(rng: &mut TestRng) -> Box<dyn Fn(f64) -> f64> {
    match rng.gen_range(0..4) {
        0 => {
            let (alpha, beta) = (rng.gen_range(0.5..5.0), rng.gen_range(0.5..3.0));
            Box::new(move |d: f64| (1.0 + alpha * d).powf(-beta))
        }
        1 => {
            let r = rng.gen_range(0.2..5.0);
            Box::new(move |d: f64| (-r * d).exp())
        }
        2 => {
            let len = rng.gen_range(2.0..6.0);
            Box::new(move |d: f64| 1.0 - d / len)
        }
        _ => {
            let (w, r1, r2) = (rng.gen_range(0.1..0.9), rng.gen_range(0.2..2.0), rng.gen_range(2.0..5.0));
            Box::new(move |d: f64| w * (-r1 * d).exp() + (1.0 - w) * (-r2 * d).exp())
        }
    }
}

/// `K(x, y) = f(|x − y|)` tabulated on an `n × n` uniform grid over the range.
pub fn tabulated_distance_kernel(f: &dyn Fn(f64) -> f64, n: usize) -> KernelSpec {
    let nodes = range().grid(n).unwrap();
    KernelSpec::CustomTabulated(TabulatedKernel::from_fn(nodes.clone(), nodes, |x, y| f((x - y).abs())).unwrap())
}

/// Random positive density on `cells` cells: i.i.d., smooth or spiky.
pub fn random_density(rng: &mut TestRng, cells: usize) -> SamplingDistribution {
    let values: Vec<f64> = match rng.gen_range(0..3) {
        0 => (0..cells).map(|_| rng.gen_range(0.01..1.0)).collect(),
        1 => {
            let (f1, f2, p) = (rng.gen_range(0.5..6.0), rng.gen_range(0.5..6.0), rng.gen_range(0.0..6.3));
            (0..cells)
                .map(|c| {
                    let t = (c as f64 + 0.5) / cells as f64;
                    2.2 + (f1 * t * 6.283 + p).sin() + (f2 * t * 6.283).cos()
                })
                .collect()
        }
        _ => {
            let centre = rng.gen_range(0..cells);
            let width = rng.gen_range(1.0..(cells as f64 / 4.0));
            (0..cells)
                .map(|c| 1e-3 + (-((c as f64 - centre as f64) / width).powi(2)).exp())
                .collect()
        }
    };
    SamplingDistribution::from_density(range(), values).unwrap()
}

/// Random mixture of atoms and a density.
pub fn random_mixed(rng: &mut TestRng) -> SamplingDistribution {
    let cells = rng.gen_range(1..400);
    random_mixed_with_cells(rng, cells)
}

/// Random mixture whose density, if any, has exactly `cells` cells.
pub fn random_mixed_with_cells(rng: &mut TestRng, cells: usize) -> SamplingDistribution {
    let r = range();
    let atoms = (0..rng.gen_range(0..5))
        .map(|_| magsample::Atom {
            location: rng.gen_range(r.lower()..=r.upper()),
            weight: rng.gen_range(0.05..1.0),
        })
        .collect();
    let density = if rng.gen_bool(0.8) {
        Some((0..cells).map(|_| rng.gen_range(0.0..1.0)).collect())
    } else {
        None
    };
    match SamplingDistribution::new(r, atoms, density) {
        Ok(d) => d,
        Err(_) => random_mixed_with_cells(rng, cells),
    }
}

pub fn gaussian_matrix(rng: &mut TestRng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random `n × n` orthogonal matrix (QR of a Gaussian matrix).
pub fn random_orthogonal(rng: &mut TestRng, n: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, n).qr().q()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// RankMe from the eigenvalues of the smaller Gram matrix, without any SVD.
pub fn rankme_oracle(z: &DMatrix<f64>, epsilon: f64) -> f64 {
    let gram = if z.nrows() < z.ncols() {
        z * z.transpose()
    } else {
        z.transpose() * z
    };
    let sigma: Vec<f64> = jacobi_eigenvalues(gram).into_iter().map(|l| l.max(0.0).sqrt()).collect();
    let norm: f64 = sigma.iter().sum();
    let h: f64 = sigma
        .iter()
        .map(|s| s / norm + epsilon)
        .map(|p| -p * p.ln())
        .sum();
    h.exp()
}

/// Probability mass of each bin `[e_i, e_{i+1})` (last bin closed) under `dist`.
pub fn bin_probabilities(dist: &SamplingDistribution, edges: &[f64]) -> Vec<f64> {
    let nbins = edges.len() - 1;
    let mut p = vec![0.0; nbins];
    for atom in dist.atoms() {
        let bin = edges[1..].iter().position(|&e| atom.location < e).unwrap_or(nbins - 1);
        p[bin] += atom.weight;
    }
    if let Some(cells) = dist.density() {
        let cell_edges = dist.range().cell_edges(cells.len()).unwrap();
        for (c, d) in cells.iter().enumerate() {
            let (l, r) = (cell_edges[c], cell_edges[c + 1]);
            for (b, w) in edges.windows(2).enumerate() {
                let overlap = (r.min(w[1]) - l.max(w[0])).max(0.0);
                p[b] += d * overlap;
            }
        }
    }
    p
}

/// Pearson chi-square over bins with positive expected count; returns
/// `(statistic, critical value at level alpha)`.
pub fn chi_square(samples: &[f64], dist: &SamplingDistribution, bins: usize, alpha: f64) -> (f64, f64) {
    let edges = dist.range().grid(bins + 1).unwrap();
    let probs = bin_probabilities(dist, &edges);
    let mut counts = vec![0usize; bins];
    for &t in samples {
        let b = edges[1..].iter().position(|&e| t < e).unwrap_or(bins - 1);
        counts[b] += 1;
    }
    let n = samples.len() as f64;
    let mut stat = 0.0;
    let mut used = 0;
    for (c, p) in counts.iter().zip(&probs) {
        if *p > 1e-12 {
            let e = n * p;
            stat += (*c as f64 - e).powi(2) / e;
            used += 1;
        } else {
            assert_eq!(*c, 0, "sample fell in a zero-probability bin");
        }
    }
    let dof = (used - 1).max(1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(1.0 - alpha);
    (stat, critical)
}
