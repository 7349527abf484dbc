//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p semgeo-core --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::*;
use ndarray::{Array2, Axis};
use rand::Rng;
use semgeo::baselines::{cmds_project, pca_project};
use semgeo::dataset::dataset_to_csv;
use semgeo::embedding::{bundle_paths, EmbeddingBundle};
use semgeo::linalg::pairwise_distances;
use semgeo::metrics::branch::{branch_linearity, BranchSpec};
use semgeo::metrics::cluster::{davies_bouldin, silhouette};
use semgeo::metrics::graph::connectivity_graph_stats;
use semgeo::metrics::hull::convex_hull_areas;
use semgeo::metrics::rank::global_preservation;
use semgeo::metrics::void::void_analysis;
use semgeo::phate::kernel::{alpha_decay_kernel, knn_bandwidths, markov_normalize};
use semgeo::phate::mds::{classical_mds, smacof_refine};
use semgeo::phate::potential::potential_distances;
use semgeo::phate::phate_embed;
use semgeo::shipped::{dataset_path, default_data_dir, load_shipped};
use semgeo::{
    export_projection, import_projection, phate_project, plot_svg, rank_methods, read_bundle, run_matrix,
    write_bundle, MethodId, MetricsConfig, PhateParams, RankWeights,
};

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(what()) }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

// ---------------------------------------------------------------------------

fn complete_graph() -> Outcome {
    let mut r = rng(121);
    let coords = random_matrix(&mut r, 121, 2);
    let start = Instant::now();
    let s = connectivity_graph_stats(coords.view(), 1.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(s.total_edges == 7260, || format!("total_edges {}", s.total_edges))?;
    check(s.graph_density == 1.0, || format!("density {}", s.graph_density))?;
    check(s.clustering_coefficient == 1.0, || format!("clustering {}", s.clustering_coefficient))?;
    check(s.connected_components == 1, || format!("components {}", s.connected_components))?;
    check(format!("{:.2}", s.density_mean) == "120.00", || format!("degree mean {}", s.density_mean))?;
    check(format!("{:.2}", s.density_std) == "0.00", || format!("degree std {}", s.density_std))?;
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("7260 edges, density 1, clustering 1, 1 component, degree 120±0 in {elapsed:.2?}"))
}

fn phate_invariants() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst_row = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut triangles = 0u64;
    for fixture in 0..20 {
        let n = r.random_range(12..=100);
        let d = r.random_range(2..=32);
        let x = random_matrix(&mut r, n, d);
        let k = r.random_range(2..=10);
        let alpha = r.random_range(2.0..=40.0);
        let dist = pairwise_distances(x.view()).map_err(|e| e.to_string())?;
        let (sigma, _) = knn_bandwidths(dist.view(), k).map_err(|e| e.to_string())?;
        let kern = alpha_decay_kernel(dist.view(), &sigma, alpha).map_err(|e| e.to_string())?;
        worst_sym = worst_sym.max(max_abs_diff(&kern, &kern.t().to_owned()));
        let p = markov_normalize(kern.view()).map_err(|e| e.to_string())?;
        let mut pt = p.clone();
        for t in 1..=30 {
            if t > 1 {
                pt = pt.dot(&p);
            }
            for s in pt.sum_axis(Axis(1)) {
                worst_row = worst_row.max((s - 1.0).abs());
            }
        }
        let t = r.random_range(1..=30);
        let params = PhateParams { k, alpha, t, seed: fixture, ..PhateParams::default() };
        let run = phate_embed(x.view(), &params).map_err(|e| e.to_string())?;
        let v = potential_distances(semgeo::phate::kernel::diffuse(run.operator.p.view(), t).unwrap().view(), 1e-7)
            .map_err(|e| e.to_string())?;
        check(max_abs_diff(&v, &run.potential) == 0.0, || "potential not reproducible".into())?;
        let scale = v.iter().fold(0.0f64, |m, &e| m.max(e));
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    triangles += 1;
                    check(v[[i, l]] <= v[[i, j]] + v[[j, l]] + 1e-12 * scale.max(1.0), || {
                        format!("fixture {fixture}: triangle ({i},{j},{l}) violated")
                    })?;
                }
            }
        }
        let monotone = |h: &[f64]| h.windows(2).all(|w| w[1] <= w[0]);
        check(monotone(&run.smacof.history), || format!("fixture {fixture}: stress rose"))?;
        // A random start exercises many more Guttman steps.
        let init = random_matrix(&mut r, n, 2);
        let from_random = smacof_refine(v.view(), init.view(), 300, 1e-12).map_err(|e| e.to_string())?;
        check(monotone(&from_random.history), || format!("fixture {fixture}: stress rose from random start"))?;
    }
    check(worst_row <= 1e-9, || format!("row sum error {worst_row:e}"))?;
    check(worst_sym <= 1e-12, || format!("kernel asymmetry {worst_sym:e}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!(
        "20 fixtures: row error {worst_row:.1e}, asymmetry {worst_sym:.1e}, {triangles} triangles, stress monotone, {:.2?}",
        start.elapsed()
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    let mut devs: Vec<f64> = Vec::new();
    for inst in 0..10 {
        let n = r.random_range(8..=30);
        let d = r.random_range(2..=6);
        let x = random_matrix(&mut r, n, d);
        let coords = random_matrix(&mut r, n, 2);
        let groups = r.random_range(2..=4usize);
        // Every group gets at least two members.
        let labels: Vec<usize> = (0..n).map(|i| if i < 2 * groups { i % groups } else { r.random_range(0..groups) }).collect();

        let dm = pairwise_distances(x.view()).map_err(|e| e.to_string())?;
        let od = oracle_distances(&x);
        for i in 0..n {
            for j in 0..n {
                devs.push((dm[[i, j]] - od[i][j]).abs());
            }
        }
        devs.push((silhouette(coords.view(), &labels).unwrap() - oracle_silhouette(&coords, &labels)).abs());
        devs.push((davies_bouldin(coords.view(), &labels).unwrap() - oracle_davies_bouldin(&coords, &labels)).abs());

        let hulls = convex_hull_areas(coords.view(), &labels).map_err(|e| e.to_string())?;
        for g in 0..groups {
            let pts: Vec<(f64, f64)> =
                (0..n).filter(|&i| labels[i] == g).map(|i| (coords[[i, 0]], coords[[i, 1]])).collect();
            devs.push((hulls.per_label[&g.to_string()] - oracle_hull_area(&pts)).abs());
        }

        let branch: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
        let lin = branch_linearity(coords.view(), &BranchSpec::new("b", branch.clone()).unwrap())
            .map_err(|e| e.to_string())?;
        let (ratio, rho) = oracle_branch(&coords, &branch);
        devs.push((lin.variance_ratio - ratio).abs());
        devs.push((lin.spearman.abs() - rho.abs()).abs());

        let g = global_preservation(x.view(), coords.view()).map_err(|e| e.to_string())?;
        devs.push((g - oracle_global(&x, &coords)).abs());
        worst = devs.iter().fold(worst, |m, &v| m.max(v));
        check(worst <= 1e-9, || format!("instance {inst}: deviation {worst:e}"))?;
    }
    Ok(format!("10 instances, worst deviation {worst:.1e}"))
}

/// Branch linearity from a Jacobi eigensolve of the 2×2 covariance.
fn oracle_branch(coords: &Array2<f64>, idx: &[usize]) -> (f64, f64) {
    let m = idx.len() as f64;
    let mx = idx.iter().map(|&i| coords[[i, 0]]).sum::<f64>() / m;
    let my = idx.iter().map(|&i| coords[[i, 1]]).sum::<f64>() / m;
    let mut c = vec![vec![0.0; 2]; 2];
    for &i in idx {
        let v = [coords[[i, 0]] - mx, coords[[i, 1]] - my];
        for a in 0..2 {
            for b in 0..2 {
                c[a][b] += v[a] * v[b];
            }
        }
    }
    let (vals, vecs) = jacobi_eigen(&c);
    let ratio = vals[0] / (vals[0] + vals[1].max(0.0));
    let pos: Vec<f64> = idx
        .iter()
        .map(|&i| (coords[[i, 0]] - mx) * vecs[0][0] + (coords[[i, 1]] - my) * vecs[1][0])
        .collect();
    let order: Vec<f64> = (0..idx.len()).map(|i| i as f64).collect();
    (ratio, oracle_spearman(&order, &pos))
}

fn clustering_vs_branching() -> Outcome {
    let start = Instant::now();
    let data = blobs_and_branch(7);
    let blob_labels: Vec<String> = data.dataset.items[blob_rows()].iter().map(|i| i.category.clone()).collect();
    let branch = BranchSpec::new("branch", branch_rows().collect()).unwrap();

    let phate = phate_project(&data, &PhateParams::default()).map_err(|e| e.to_string())?;
    let blob_coords = phate.coords.slice(ndarray::s![blob_rows(), ..]);
    let phate_sil = silhouette(blob_coords, &blob_labels).map_err(|e| e.to_string())?;
    let phate_lin = branch_linearity(phate.coords.view(), &branch).map_err(|e| e.to_string())?;
    check(phate_sil > 0.5, || format!("phate blob silhouette {phate_sil:.3}"))?;
    check(phate_lin.variance_ratio > 0.9, || format!("phate branch variance ratio {:.3}", phate_lin.variance_ratio))?;

    let pca = pca_project(&data, 2).map_err(|e| e.to_string())?;
    let pca_sil = silhouette(pca.coords.slice(ndarray::s![blob_rows(), ..]), &blob_labels).map_err(|e| e.to_string())?;
    check(pca_sil > 0.5, || format!("pca blob silhouette {pca_sil:.3}"))?;

    let cells = run_matrix(
        std::slice::from_ref(&data),
        &MethodId::ALL,
        &[PhateParams::default()],
        &MetricsConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let ranking = rank_methods(&cells, &RankWeights::default());
    let top: BTreeSet<MethodId> = ranking.iter().take(2).map(|s| s.method).collect();
    let order: Vec<String> = ranking.iter().map(|s| format!("{}={:.3}", s.method, s.score)).collect();
    check(top == BTreeSet::from([MethodId::Phate, MethodId::Spectral]), || {
        format!("ranking {}", order.join(" "))
    })?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "phate silhouette {phate_sil:.3}, variance ratio {:.3}; pca silhouette {pca_sil:.3}; ranking {}; {:.2?}",
        phate_lin.variance_ratio,
        order.join(" "),
        start.elapsed()
    ))
}

/// Random planar points carried into 8-D by an orthonormal 2-frame plus an offset.
fn realizable(seed: u64, n: usize) -> (Array2<f64>, Array2<f64>) {
    let mut r = rng(seed);
    let planar = random_matrix(&mut r, n, 2) * 5.0;
    let raw = random_matrix(&mut r, DIM, 2);
    let mut e0: Vec<f64> = raw.column(0).to_vec();
    let norm = e0.iter().map(|v| v * v).sum::<f64>().sqrt();
    e0.iter_mut().for_each(|v| *v /= norm);
    let mut e1: Vec<f64> = raw.column(1).to_vec();
    let dot: f64 = e0.iter().zip(&e1).map(|(a, b)| a * b).sum();
    e1.iter_mut().zip(&e0).for_each(|(v, u)| *v -= dot * u);
    let norm = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1.iter_mut().for_each(|v| *v /= norm);
    let offset: Vec<f64> = (0..DIM).map(|_| r.random_range(-3.0..3.0)).collect();
    let high = Array2::from_shape_fn((n, DIM), |(i, k)| planar[[i, 0]] * e0[k] + planar[[i, 1]] * e1[k] + offset[k]);
    (planar, high)
}

fn exact_recovery() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_g = 0.0f64;
    for seed in 0..5 {
        let (planar, high) = realizable(50 + seed, 25 + 5 * seed as usize);
        let target = oracle_distances(&planar);
        let data = plain(high.clone());
        let proj = cmds_project(&data, 2).map_err(|e| e.to_string())?;
        let dv = pairwise_distances(high.view()).map_err(|e| e.to_string())?;
        let direct = classical_mds(dv.view(), 2).map_err(|e| e.to_string())?;
        for coords in [&proj.coords, &direct] {
            let got = oracle_distances(coords);
            for (a, b) in got.iter().flatten().zip(target.iter().flatten()) {
                worst = worst.max((a - b).abs());
            }
        }
        let g = global_preservation(high.view(), proj.coords.view()).map_err(|e| e.to_string())?;
        worst_g = worst_g.max((g - 1.0).abs());
    }
    check(worst <= 1e-9, || format!("distance error {worst:e}"))?;
    check(worst_g <= 1e-9, || format!("global preservation off by {worst_g:e}"))?;
    Ok(format!("distance error {worst:.1e}, global preservation error {worst_g:.1e}"))
}

fn lattice(side: usize, hole: Option<std::ops::Range<usize>>) -> Array2<f64> {
    let mut pts = Vec::new();
    for i in 0..side {
        for j in 0..side {
            if let Some(h) = &hole {
                if h.contains(&i) && h.contains(&j) {
                    continue;
                }
            }
            pts.extend([i as f64, j as f64]);
        }
    }
    Array2::from_shape_vec((pts.len() / 2, 2), pts).unwrap()
}

fn void_detection() -> Outcome {
    let cfg = MetricsConfig::default();
    let holed = lattice(20, Some(7..13));
    let a = void_analysis(holed.view(), cfg.grid_resolution, cfg.radius_multiplier).map_err(|e| e.to_string())?;
    check(a.void_count >= 1, || "no void found in the holed lattice".into())?;
    // The removed block spans 7..=12, so the hole is the open square (6, 13)².
    let inside = |c: (f64, f64)| c.0 > 6.0 && c.0 < 13.0 && c.1 > 6.0 && c.1 < 13.0;
    check(a.voids.iter().all(|v| inside(v.centroid)), || format!("void centroids {:?}", a.voids.iter().map(|v| v.centroid).collect::<Vec<_>>()))?;
    let full = lattice(20, None);
    let b = void_analysis(full.view(), cfg.grid_resolution, cfg.radius_multiplier).map_err(|e| e.to_string())?;
    check(b.void_count == 0, || format!("{} voids in the saturated lattice", b.void_count))?;
    Ok(format!("holed lattice: {} void(s) at {:?}; saturated lattice: 0", a.void_count, a.voids[0].centroid))
}

fn round_trips() -> Outcome {
    let data_dir = default_data_dir();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for id in semgeo::shipped::SHIPPED_IDS {
        let original = std::fs::read(dataset_path(&data_dir, id)).map_err(|e| e.to_string())?;
        let ds = load_shipped(&data_dir, id).map_err(|e| e.to_string())?;
        check(dataset_to_csv(&ds).as_bytes() == original.as_slice(), || format!("{id}.csv not reproduced byte for byte"))?;
    }

    let mut r = rng(77);
    let m = random_matrix(&mut r, 40, 16);
    let labels: Vec<String> = (0..40).map(|i| format!("w{i}")).collect();
    let bundle = EmbeddingBundle::from_rows("fixture-model", labels, &m).map_err(|e| e.to_string())?;
    let first = tmp.path().join("a");
    let second = tmp.path().join("b");
    write_bundle(&bundle, &first).map_err(|e| e.to_string())?;
    let back = read_bundle(&first).map_err(|e| e.to_string())?;
    check(back == bundle, || "bundle differs after read".into())?;
    write_bundle(&back, &second).map_err(|e| e.to_string())?;
    let (ma, fa) = bundle_paths(&first);
    let (mb, fb) = bundle_paths(&second);
    for (x, y) in [(fa, fb), (ma, mb)] {
        check(std::fs::read(&x).unwrap() == std::fs::read(&y).unwrap(), || format!("{} rewritten differently", x.display()))?;
    }

    let data = blobs_and_branch(11);
    let params = PhateParams::default();
    let proj = phate_project(&data, &params).map_err(|e| e.to_string())?;
    let dir = tmp.path().join("proj");
    export_projection(&proj, &dir).map_err(|e| e.to_string())?;
    let imported = import_projection::<f64>(&dir).map_err(|e| e.to_string())?;
    let err = max_abs_diff(&proj.coords, &imported.coords);
    check(err <= 1e-9, || format!("coords moved by {err:e}"))?;
    check(imported.labels == proj.labels && imported.params == proj.params, || "metadata changed".into())?;

    let again = phate_project(&data, &params).map_err(|e| e.to_string())?;
    let svg_a = plot_svg(&proj, &data.dataset).map_err(|e| e.to_string())?;
    let svg_b = plot_svg(&again, &data.dataset).map_err(|e| e.to_string())?;
    let svg_c = plot_svg(&imported, &data.dataset).map_err(|e| e.to_string())?;
    check(svg_a == svg_b && svg_a == svg_c, || "plot output differs between runs".into())?;
    Ok(format!("5 dataset CSVs byte-exact, bundle byte-exact, projection error {err:.1e}, plot deterministic"))
}

fn dataset_fidelity() -> Outcome {
    let data_dir = default_data_dir();
    let count = |ds: &semgeo::Dataset, f: &dyn Fn(&semgeo::LexicalItem) -> bool| ds.items.iter().filter(|i| f(i)).count();
    let ascii = load_shipped(&data_dir, "ascii").map_err(|e| e.to_string())?;
    check(ascii.len() == 184, || format!("ascii has {} items", ascii.len()))?;
    let zinets = load_shipped(&data_dir, "zinets").map_err(|e| e.to_string())?;
    check(zinets.len() == 242, || format!("zinets has {} items", zinets.len()))?;
    let domains: [(&str, usize); 14] = [
        ("numbers", 15),
        ("colors", 14),
        ("family", 16),
        ("animals", 15),
        ("body", 15),
        ("emotions", 15),
        ("time", 16),
        ("elements", 15),
        ("food", 15),
        ("education", 15),
        ("tools", 15),
        ("actions", 15),
        ("directions", 15),
        ("qualities", 16),
    ];
    for (cat, want) in domains {
        let got = count(&zinets, &|i| i.category == cat);
        check(got == want, || format!("zinets {cat}: {got} items, want {want}"))?;
    }
    let yuanzi = load_shipped(&data_dir, "yuanzi").map_err(|e| e.to_string())?;
    let structural = count(&yuanzi, &|i| i.item_class == semgeo::ItemClass::Structural);
    check(structural == 90, || format!("yuanzi structural bucket {structural}"))?;
    Ok("ascii 184; zinets 242 with 14 domain sizes (numbers 15, colors 14, …); yuanzi structural 90".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("complete-graph parity", complete_graph),
        ("phate numerical invariants", phate_invariants),
        ("oracle equivalence", oracle_equivalence),
        ("clustering vs branching", clustering_vs_branching),
        ("exact recovery", exact_recovery),
        ("void detection", void_detection),
        ("format round-trips", round_trips),
        ("dataset fidelity", dataset_fidelity),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(Ok(detail)) => println!("PASS {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {name}: panicked");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
