//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::ops::ControlFlow;
use std::time::Instant;

use danzer::analysis::{
    check_visibility, density_profile, discrepancy_1d, dispersion_1d, estimate_visibility, find_empty_tube,
    fractional_parts, heavy_box, min_gap, sud_estimate, udt_check, vacant_strip,
};
use danzer::calibrate::Calibration;
use danzer::epsnet::{d2_aligned_net, hw_net, slab_lower_bound, verify_net, BoxSampler, Net};
use danzer::generators::{PointSetSpec, SequenceSpec, PHI};
use danzer::geometry::Window;
use danzer::stats::loglog_slope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), danzer::Error>;

fn calibration() -> Calibration {
    serde_json::from_str(include_str!("fixtures/calibration.json")).expect("calibration fixture")
}

fn c1_dispersion_discrepancy() -> Outcome {
    let seqs = [
        ("golden", SequenceSpec::Golden),
        ("tsokanos", SequenceSpec::Tsokanos),
        ("quadratic", SequenceSpec::Quadratic { alpha: PHI }),
    ];
    let mut violations = Vec::new();
    let mut checked = 0;
    for (name, seq) in &seqs {
        for k in 6..=12 {
            let n = 1usize << k;
            let mut u: Vec<f64> = fractional_parts(seq, n)?.into_iter().map(|p| p[0]).collect();
            let disp = dispersion_1d(&mut u);
            let disc = discrepancy_1d(&mut u);
            checked += 1;
            if disp < 1.0 / (2.0 * (n as f64 + 1.0)) - 1e-12 || disp > disc / 2.0 + 1e-12 {
                violations.push(format!("{name} N={n} δ={disp:.4e} Δ/2={:.4e}", disc / 2.0));
            }
        }
    }
    Ok((
        violations.is_empty(),
        format!("{} violations of {checked} cases {}", violations.len(), violations.join("; ")),
    ))
}

fn sud_slope(seq: &SequenceSpec) -> Result<(f64, Vec<f64>), danzer::Error> {
    let ns: Vec<f64> = (8..=14).map(|k| (1u64 << k) as f64).collect();
    let values = ns
        .iter()
        .map(|n| sud_estimate(seq, *n as usize, 64, 256, 1).map(|e| e.value))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok((loglog_slope(&ns, &values)?, values))
}

fn c2_tsokanos() -> Outcome {
    let (slope, v) = sud_slope(&SequenceSpec::Tsokanos)?;
    Ok((slope <= -0.35, format!("slope {slope:.3} (need <= -0.35), δ̂ {v:.4?}")))
}

fn c3_quadratic() -> Outcome {
    let (slope, v) = sud_slope(&SequenceSpec::Quadratic { alpha: PHI })?;
    Ok((slope <= -0.20, format!("slope {slope:.3} (need <= -0.20), δ̂ {v:.4?}")))
}

fn c4_peres_visibility() -> Outcome {
    let cal = calibration().visibility;
    let spec = PointSetSpec::PeresForest;
    let window = Window::centered(2, cal.window_radius)?;
    let eps = [0.2, 0.1, 0.05];
    let v = eps
        .iter()
        .map(|e| estimate_visibility(&spec, *e, cal.l_max, 10_000, &window, cal.seed))
        .collect::<Result<Vec<f64>, _>>()?;
    let finite = v.iter().all(|x| x.is_finite());
    let slope = if finite { loglog_slope(&eps, &v)? } else { f64::NAN };
    let mut hits = Vec::new();
    for e in eps {
        let r = check_visibility(&spec, e, cal.length(e), 10_000, &window, cal.seed + 1)?;
        hits.push(r.hit_fraction);
    }
    let ok = finite && (-4.5..=-0.5).contains(&slope) && hits.iter().all(|h| *h == 1.0);
    Ok((
        ok,
        format!("V̂ {v:?}, slope {slope:.3} (need [-4.5, -0.5]), hit fractions at C·ε⁻³ {hits:?}"),
    ))
}

fn c5_lattice_fails() -> Outcome {
    let z2 = PointSetSpec::integer_lattice(2);
    let window = Window::centered(2, 10.0)?;
    let v = estimate_visibility(&z2, 0.1, 8192.0, 10_000, &window, 1)?;
    // 20 offsets over [-10, 10) put a line centre at 0.5
    let (seg, len) = find_empty_tube(&z2, 0.1, &window, &[vec![1.0, 0.0]], 20)?;
    let extent = window.hi[0] - window.lo[0];
    Ok((
        v == f64::INFINITY && len == extent,
        format!("V̂ = {v}, empty tube length {len} of extent {extent} at offset {}", seg.base[1]),
    ))
}

fn c6_d2_unit_boxes() -> Outcome {
    let d2 = PointSetSpec::D2.compile()?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = 10_000;
    let mut hit = 0;
    let mut first_miss = None;
    for _ in 0..trials {
        let a: f64 = rng.random_range(-10.0..=10.0);
        let (w, h) = ((a / 2.0).exp2(), (-a / 2.0).exp2());
        let c = [rng.random_range(-50.0..=50.0), rng.random_range(-50.0..=50.0)];
        let b = [(c[0] - w / 2.0, c[0] + w / 2.0), (c[1] - h / 2.0, c[1] + h / 2.0)];
        let window = Window::new(
            vec![b[0].0, b[1].0],
            vec![b[0].1.next_up(), b[1].1.next_up()],
        )?;
        let flow = d2.visit(&window, &mut |p| {
            if (b[0].0..=b[0].1).contains(&p[0]) && (b[1].0..=b[1].1).contains(&p[1]) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        if flow.is_break() {
            hit += 1;
        } else if first_miss.is_none() {
            first_miss = Some(b);
        }
    }
    let frac = hit as f64 / trials as f64;
    Ok((frac == 1.0, format!("hit fraction {frac} over {trials} boxes, first miss {first_miss:?}")))
}

fn c7_vacant_strip() -> Outcome {
    let widths = |spec: &PointSetSpec| -> Result<Vec<f64>, danzer::Error> {
        [50.0, 100.0, 200.0]
            .iter()
            .map(|r| Ok(vacant_strip(spec, &Window::centered(2, *r)?, &[])?.width))
            .collect()
    };
    let two = widths(&PointSetSpec::two_grid_default())?;
    let three = widths(&PointSetSpec::three_grid_default())?;
    let ok = two.iter().all(|w| *w >= 0.9 * two[0]) && three[2] <= 0.5 * three[0];
    // reported only, to show where the three-grid width goes beyond the tested radii
    let far = vacant_strip(&PointSetSpec::three_grid_default(), &Window::centered(2, 400.0)?, &[])?.width;
    Ok((
        ok,
        format!("two-grid widths {two:.4?}, three-grid widths {three:.4?} (radius 400: {far:.4})"),
    ))
}

fn c8_min_gap() -> Outcome {
    let gaps = |spec: &PointSetSpec| -> Result<Vec<f64>, danzer::Error> {
        [50.0, 100.0, 200.0]
            .iter()
            .map(|r| min_gap(spec, &Window::centered(2, *r)?))
            .collect()
    };
    let three = gaps(&PointSetSpec::three_grid_default())?;
    let peres = gaps(&PointSetSpec::PeresForest)?;
    let (lo, hi) = three.iter().fold((f64::INFINITY, 0.0f64), |(a, b), g| (a.min(*g), b.max(*g)));
    let ok = (hi - lo) <= 0.1 * lo && lo > 1e-3 && peres[2] <= 0.5 * peres[0];
    Ok((ok, format!("three-grid {three:.6?}, peres {peres:.6?}")))
}

fn nets() -> Result<Vec<(String, Net)>, danzer::Error> {
    let mut out = Vec::new();
    for eps in [0.1, 0.01] {
        out.push((format!("hw({eps})"), hw_net(eps, 2, 16.0, 1)?));
        out.push((format!("d2({eps})"), d2_aligned_net(eps)?));
    }
    Ok(out)
}

fn c9_slab() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, net) in nets()? {
        let slab = slab_lower_bound(&net.points, net.dim)?;
        let k = net.len();
        let empty = net.points.iter().all(|p| !slab.contains_strictly(p));
        let big = slab.volume() >= 1.0 / (k as f64 + 1.0) - 1e-12;
        ok &= empty && big;
        lines.push(format!("{name}: k={k} vol={:.4e}", slab.volume()));
    }
    Ok((ok, lines.join(", ")))
}

fn c10_net_verification() -> Outcome {
    let d2 = verify_net(&d2_aligned_net(0.01)?, BoxSampler::Aligned, 0.01, 10_000, 1)?;
    let hw = verify_net(&hw_net(0.01, 2, 16.0, 1)?, BoxSampler::Aligned, 0.01, 10_000, 1)?;
    Ok((
        d2.hit_fraction == 1.0 && hw.hit_fraction >= 0.99,
        format!(
            "d2 net hit {} (need 1, first miss {:?}), hw net hit {} (need >= 0.99)",
            d2.hit_fraction, d2.worst_missed_box, hw.hit_fraction
        ),
    ))
}

fn c11_heavy_box() -> Outcome {
    let net = hw_net(0.01, 2, 16.0, 1)?;
    let hb = heavy_box(&net.points, 0.01, true, 0, 1)?;
    let recount = net.points.iter().filter(|p| hb.range.contains(p)).count();
    let inside = hb.range.intervals.iter().all(|(a, b)| *a >= 0.0 && *b <= 1.0);
    let ok = hb.range.volume() >= 0.01 && hb.count >= 2 && recount == hb.count && inside;
    Ok((ok, format!("count {} (recount {recount}) in volume {:.6}", hb.count, hb.range.volume())))
}

fn c12_udt() -> Outcome {
    let thetas = [vec![0.0], vec![PHI]];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = (f64::INFINITY, 0.0, 0);
    for _ in 0..100 {
        let xi = [rng.random::<f64>()];
        for k in 4..=10 {
            let t = 1u64 << k;
            let m = udt_check(&thetas, &xi, t)?;
            let q = t as f64 * m.margin;
            if q < worst.0 {
                worst = (q, xi[0], t);
            }
        }
    }
    Ok((
        worst.0 >= 0.2,
        format!("min T·margin {:.4} at ξ={:.6}, T={} (need >= 0.2)", worst.0, worst.1, worst.2),
    ))
}

fn c13_density() -> Outcome {
    let d = density_profile(&PointSetSpec::integer_lattice(2), &[100.0])?[0].1;
    let brute = (-100i64..=100)
        .flat_map(|i| (-100i64..=100).map(move |j| i * i + j * j))
        .filter(|r| *r <= 10_000)
        .count();
    Ok((
        brute == 31417 && d == 31417.0 / 10_000.0,
        format!("density {d}, brute-force count {brute}"),
    ))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 dispersion-discrepancy inequality", c1_dispersion_discrepancy),
        ("2 tsokanos decay", c2_tsokanos),
        ("3 quadratic decay", c3_quadratic),
        ("4 peres visibility", c4_peres_visibility),
        ("5 non-forests fail", c5_lattice_fails),
        ("6 D2 hits unit aligned boxes", c6_d2_unit_boxes),
        ("7 two-grid vacant strip", c7_vacant_strip),
        ("8 three-grid uniform discreteness", c8_min_gap),
        ("9 eps-net slab bound", c9_slab),
        ("10 net verification", c10_net_verification),
        ("11 heavy-box existence", c11_heavy_box),
        ("12 UDT margin", c12_udt),
        ("13 density sanity", c13_density),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (ok, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {name}: {} [{:.1}s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {failed} criteria failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
