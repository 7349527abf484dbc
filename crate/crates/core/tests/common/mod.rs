//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use semgeo::{AlignedData, Dataset, ItemClass, LexicalItem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, d), || rng.random_range(-1.0..1.0))
}

pub fn item(label: &str, category: &str, seq: Option<u32>) -> LexicalItem {
    LexicalItem {
        label: label.to_string(),
        gloss: String::new(),
        language: "und".into(),
        category: category.to_string(),
        item_class: ItemClass::Meaningful,
        sequence_index: seq,
        network_root: None,
    }
}

/// Aligned data with labels `p0, p1, …` and the given categories.
pub fn aligned(matrix: Array2<f64>, categories: &[String], seqs: &[Option<u32>]) -> AlignedData<f64> {
    let items = (0..matrix.nrows())
        .map(|i| item(&format!("p{i}"), &categories[i], seqs.get(i).copied().flatten()))
        .collect();
    let ds = Dataset::from_items("fixture", items).unwrap();
    AlignedData::new(ds, matrix, "sha256:fixture").unwrap()
}

pub fn plain(matrix: Array2<f64>) -> AlignedData<f64> {
    let cats = vec!["all".to_string(); matrix.nrows()];
    aligned(matrix, &cats, &[])
}

pub const DIM: usize = 8;
pub const BLOB_SIZE: usize = 20;
pub const BRANCH_SIZE: usize = 20;

/// Three tight Gaussian blobs (σ = 0.1, centres ≥ 10 apart) and an ordered
/// linear branch of length 10 running through the first blob's centre along
/// an otherwise unused axis. Blob rows come first, then the branch in order.
pub fn blobs_and_branch(seed: u64) -> AlignedData<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let centres = [(0.0, 0.0), (10.0, 0.0), (5.0, 8.66)];
    let n = 3 * BLOB_SIZE + BRANCH_SIZE;
    let mut x = Array2::zeros((n, DIM));
    let mut cats = Vec::with_capacity(n);
    let mut seqs = Vec::with_capacity(n);
    for (b, &(cx, cy)) in centres.iter().enumerate() {
        for i in 0..BLOB_SIZE {
            let row = b * BLOB_SIZE + i;
            for d in 0..DIM {
                x[[row, d]] = noise.sample(&mut r);
            }
            x[[row, 0]] += cx;
            x[[row, 1]] += cy;
            cats.push(format!("blob_{}", (b'a' + b as u8) as char));
            seqs.push(None);
        }
    }
    let length = 10.0;
    for i in 0..BRANCH_SIZE {
        let row = 3 * BLOB_SIZE + i;
        for d in 0..DIM {
            x[[row, d]] = noise.sample(&mut r);
        }
        x[[row, 5]] += -length / 2.0 + length * i as f64 / (BRANCH_SIZE - 1) as f64;
        cats.push("branch".into());
        seqs.push(Some(i as u32));
    }
    aligned(x, &cats, &seqs)
}

pub fn blob_rows() -> std::ops::Range<usize> {
    0..3 * BLOB_SIZE
}

pub fn branch_rows() -> std::ops::Range<usize> {
    3 * BLOB_SIZE..3 * BLOB_SIZE + BRANCH_SIZE
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        s += (a[k] - b[k]) * (a[k] - b[k]);
    }
    s.sqrt()
}

pub fn rows(x: &Array2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

// ---- brute-force oracles -------------------------------------------------

pub fn oracle_distances(x: &Array2<f64>) -> Vec<Vec<f64>> {
    let r = rows(x);
    let n = r.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = dist(&r[i], &r[j]);
        }
    }
    d
}

pub fn oracle_silhouette(x: &Array2<f64>, labels: &[usize]) -> f64 {
    let r = rows(x);
    let n = r.len();
    let mut total = 0.0;
    for i in 0..n {
        let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for j in 0..n {
            if i != j {
                let e = sums.entry(labels[j]).or_insert((0.0, 0));
                e.0 += dist(&r[i], &r[j]);
                e.1 += 1;
            }
        }
        let own = labels.iter().filter(|&&l| l == labels[i]).count();
        if own == 1 {
            continue;
        }
        let a = sums[&labels[i]].0 / sums[&labels[i]].1 as f64;
        let mut b = f64::INFINITY;
        for (&l, &(s, c)) in &sums {
            if l != labels[i] {
                b = b.min(s / c as f64);
            }
        }
        let m = if a > b { a } else { b };
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    total / n as f64
}

pub fn oracle_davies_bouldin(x: &Array2<f64>, labels: &[usize]) -> f64 {
    let r = rows(x);
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort();
    ids.dedup();
    let dim = r[0].len();
    let mut cent = Vec::new();
    let mut scat = Vec::new();
    for &c in &ids {
        let members: Vec<&Vec<f64>> = r.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
        let mut m = vec![0.0; dim];
        for p in &members {
            for k in 0..dim {
                m[k] += p[k] / members.len() as f64;
            }
        }
        let s = members.iter().map(|p| dist(p, &m)).sum::<f64>() / members.len() as f64;
        cent.push(m);
        scat.push(s);
    }
    let mut total = 0.0;
    for i in 0..ids.len() {
        let mut worst: f64 = 0.0;
        for j in 0..ids.len() {
            if i != j {
                worst = worst.max((scat[i] + scat[j]) / dist(&cent[i], &cent[j]));
            }
        }
        total += worst;
    }
    total / ids.len() as f64
}

/// Shoelace area of the convex hull found by testing every ordered pair as a
/// candidate edge (gift wrapping by exhaustion).
pub fn oracle_hull_area(points: &[(f64, f64)]) -> f64 {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    // Hull edges: pairs with every other point strictly on one side (or on
    // the segment between them).
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (pts[i], pts[j]);
            let ok = pts.iter().all(|&p| {
                let c = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
                c > 1e-12 || (c.abs() <= 1e-12 && on_segment(a, b, p))
            });
            if ok {
                edges.push((a, b));
            }
        }
    }
    // Sum of cross products over the counter-clockwise edges (Green's theorem).
    let twice: f64 = edges.iter().map(|&(a, b)| a.0 * b.1 - b.0 * a.1).sum();
    (twice / 2.0).abs()
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    let t = if (b.0 - a.0).abs() > (b.1 - a.1).abs() {
        (p.0 - a.0) / (b.0 - a.0)
    } else {
        (p.1 - a.1) / (b.1 - a.1)
    };
    (-1e-12..=1.0 + 1e-12).contains(&t)
}

fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    // Rank = 1 + (# smaller) + (# equal others)/2.
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as f64;
            let eq = v.iter().filter(|&&y| y == x).count() as f64;
            less + (eq + 1.0) / 2.0
        })
        .collect()
}

pub fn oracle_spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (oracle_ranks(a), oracle_ranks(b));
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn oracle_global(high: &Array2<f64>, low: &Array2<f64>) -> f64 {
    let (dh, dl) = (oracle_distances(high), oracle_distances(low));
    let n = dh.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            a.push(dh[i][j]);
            b.push(dl[i][j]);
        }
    }
    oracle_spearman(&a, &b)
}

/// Cyclic Jacobi eigenvalue iteration; eigenvalues descending with
/// eigenvectors as columns.
pub fn jacobi_eigen(m: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = m.len();
    let mut a = m.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].partial_cmp(&a[x][x]).unwrap());
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (values, vectors)
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
