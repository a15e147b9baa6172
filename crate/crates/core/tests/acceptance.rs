//! Acceptance checks. Runs as a plain binary so every verdict line is shown
//! by `cargo test`. Exits non-zero if any check fails unexpectedly.

use std::process::ExitCode;
use std::time::Instant;

use hapqkd::atmosphere::{rain_rate, snow_rate, weather_rate, SkyPreset, SkyRadiance, WeatherCondition, WeatherKind};
use hapqkd::budget::Method;
use hapqkd::geometry::{ground_footprint_diameter, los_distance, LinkGeometry};
use hapqkd::harness::{run_sweep_with, FigurePreset, Scenario};
use hapqkd::qkd::{
    background_power, calibrate_fov_solid_angle, cv_feasibility, cv_snr, dv_feasibility, max_feasible_divergence,
    max_tolerable_loss_db, DivergenceSolution,
};

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
    /// Reason a failure is accepted rather than fixed.
    known_gap: Option<&'static str>,
}

fn check(id: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict { id, pass, detail, known_gap: None }
}

fn threshold(s: &Scenario, sky: SkyPreset) -> f64 {
    max_tolerable_loss_db(&SkyRadiance::preset(sky), &s.receiver, &s.detector, &s.dv, s.transmitter.wavelength_m())
        .unwrap()
}

fn night_threshold() -> Verdict {
    let l = threshold(&Scenario::default(), SkyPreset::Moonless);
    check("1 night threshold", (l - 52.3).abs() <= 1.0, format!("moonless {l:.3} dB, want 52.3 +/- 1"))
}

fn daytime_thresholds() -> Verdict {
    let mut s = Scenario::default();
    let omega = calibrate_fov_solid_angle(
        43.0,
        &SkyRadiance::preset(SkyPreset::DayClear),
        &s.receiver,
        &s.detector,
        &s.dv,
        s.transmitter.wavelength_m(),
    )
    .unwrap();
    s.receiver.fov_solid_angle_sr = Some(omega);
    let clear = threshold(&s, SkyPreset::DayClear);
    let hazy = threshold(&s, SkyPreset::DayHazy);
    let cloud = threshold(&s, SkyPreset::DayCloud);
    let night = threshold(&s, SkyPreset::Moonless);
    let pass =
        (clear - 43.0).abs() < 1e-9 && (hazy - 34.0).abs() <= 1.0 && (cloud - 24.0).abs() <= 1.0 && (night - 52.0).abs() <= 1.0;
    check(
        "2 daytime thresholds",
        pass,
        format!(
            "omega {omega:.4e} sr -> clear {clear:.3}, hazy {hazy:.3} (34 +/- 1), cloud {cloud:.3} (24 +/- 1), night {night:.3} (52 +/- 1) dB"
        ),
    )
}

fn background_range() -> Verdict {
    let rx = Scenario::default().receiver;
    let hi = background_power(&SkyRadiance::preset(SkyPreset::DayCloud), &rx).unwrap();
    let lo = background_power(&SkyRadiance::preset(SkyPreset::Moonless), &rx).unwrap();
    let db = 10.0 * (hi / lo).log10();
    check("3 background range", (db - 70.0).abs() < 1e-9, format!("{db:.6} dB, want 70.000"))
}

fn los_span() -> Verdict {
    let near = los_distance(&LinkGeometry::new(20_000.0, 90.0).unwrap()).unwrap();
    let far = los_distance(&LinkGeometry::new(20_000.0, 5.0).unwrap()).unwrap();
    let exact = 20_000.0 / 5f64.to_radians().sin();
    let endpoints_ok = near == 20_000.0 && far == exact;
    let stated = 229_457.0;
    Verdict {
        id: "4 LoS span",
        pass: endpoints_ok && far == stated,
        detail: format!("[{near}, {far:.2}] m; stated upper bound {stated} m; H/sin(5 deg) = {exact:.2} m"),
        known_gap: endpoints_ok.then_some(
            "the stated 229 457 m is not H/sin(5 deg); the computed endpoint equals the exact formula value",
        ),
    }
}

fn footprints() -> Verdict {
    let r1 = ground_footprint_diameter(0.1, 20_000.0, 1e-3).unwrap() / 2.0;
    let r3 = ground_footprint_diameter(0.1, 20_000.0, 3e-3).unwrap() / 2.0;
    let pass = (r1 / 10.0 - 1.0).abs() <= 0.01 && (r3 / 30.0 - 1.0).abs() <= 0.01;
    check("5 footprints", pass, format!("1 mrad {r1:.3} m, 3 mrad {r3:.3} m (10 / 30 m +/- 1%)"))
}

fn regular_elevation_loss() -> Verdict {
    let s = Scenario::default();
    let l = s.link().total(Method::Method1).unwrap().channel_total;
    check("6 loss at 20 deg", (11.1..=14.1).contains(&l), format!("method1 {l:.3} dB, want [11.1, 14.1]"))
}

fn aperture_optimum() -> Verdict {
    let mut link = Scenario::default().link();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=2500 {
        let d = 0.05 + 0.25 * i as f64 / 2500.0;
        link.transmitter.aperture_m = d;
        let l = link.total(Method::Method1).unwrap().channel_total;
        if l < best.0 {
            best = (l, d);
        }
    }
    check(
        "7 aperture optimum",
        (0.11..=0.13).contains(&best.1),
        format!("argmin D_tx {:.4} m ({:.3} dB), want [0.11, 0.13]", best.1, best.0),
    )
}

fn divergence_limit() -> Verdict {
    let mut s = Scenario::default();
    s.geometry = LinkGeometry::from_los_distance(20_000.0, 60_000.0).unwrap();
    let limit = threshold(&s, SkyPreset::Moonless);
    match max_feasible_divergence(&s.link(), Method::Method1, limit).unwrap() {
        DivergenceSolution::Bounded(t) => check(
            "8 divergence limit",
            (2.4e-3..=3.0e-3).contains(&t),
            format!("{:.4} mrad at 60 km, want [2.4, 3.0]", t * 1e3),
        ),
        other => check("8 divergence limit", false, format!("{other:?}")),
    }
}

fn method_dominance() -> Verdict {
    let s = Scenario::default();
    let mut worst = f64::INFINITY;
    for i in 0..=210 {
        let los = 20_000.0 + 1_000.0 * i as f64;
        let mut link = s.link();
        link.geometry = LinkGeometry::from_los_distance(20_000.0, los).unwrap();
        let gap = link.total(Method::Nanobob).unwrap().channel_total - link.total(Method::Method1).unwrap().channel_total;
        worst = worst.min(gap);
    }
    check("9 method dominance", worst > 0.0, format!("min(nanobob - method1) = {worst:.3} dB over 211 LoS samples"))
}

fn properties() -> Verdict {
    let mut failures = Vec::new();

    let vis: Vec<f64> = (0..=400).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 400.0)).collect();
    for kind in [WeatherKind::Fog, WeatherKind::Rain, WeatherKind::Snow] {
        let rates: Vec<f64> = vis.iter().map(|&v| weather_rate(&WeatherCondition::new(kind, v), 1550.0).unwrap()).collect();
        if !rates.windows(2).all(|w| w[1] < w[0]) {
            failures.push(format!("{} rate not strictly decreasing", kind.name()));
        }
    }
    for &v in &vis {
        let ratio = snow_rate(v).unwrap() / rain_rate(v).unwrap();
        if (ratio - 58.0 / 2.8).abs() > 1e-12 {
            failures.push(format!("snow/rain ratio {ratio} at V={v}"));
            break;
        }
    }

    let s = Scenario::default();
    let lambda = s.transmitter.wavelength_m();
    let losses: Vec<f64> = (0..=800).map(|i| i as f64 * 0.1).collect();
    let mut night_curves = Vec::new();
    for preset in SkyPreset::NAMED {
        let sky = SkyRadiance::preset(preset);
        let q: Vec<f64> = losses
            .iter()
            .map(|&l| dv_feasibility(&sky, &s.receiver, &s.detector, &s.dv, lambda, l).unwrap().qber.unwrap())
            .collect();
        if !q.iter().all(|v| (0.0..=0.5).contains(v)) || !q.windows(2).all(|w| w[1] >= w[0]) {
            failures.push(format!("{} QBER out of range or not monotone", preset.name()));
        }
        let limit = max_tolerable_loss_db(&sky, &s.receiver, &s.detector, &s.dv, lambda).unwrap();
        let at = dv_feasibility(&sky, &s.receiver, &s.detector, &s.dv, lambda, limit).unwrap().qber.unwrap();
        if (at - s.dv.qber_limit).abs() > 1e-6 {
            failures.push(format!("{} forward/inverse mismatch {at}", preset.name()));
        }
        if preset.is_night() {
            night_curves.push(q);
        }
    }
    let mut night_spread: f64 = 0.0;
    for (i, &l) in losses.iter().enumerate().filter(|(_, &l)| l < 55.0) {
        let col: Vec<f64> = night_curves.iter().map(|c| c[i]).collect();
        let spread = col.iter().cloned().fold(f64::MIN, f64::max) - col.iter().cloned().fold(f64::MAX, f64::min);
        night_spread = night_spread.max(spread);
        if spread > 1e-3 {
            failures.push(format!("night QBER spread {spread:.5} at {l} dB"));
            break;
        }
    }

    let snr: Vec<f64> = losses.iter().map(|&l| cv_snr(&s.cv, l).unwrap()).collect();
    if !snr.windows(2).all(|w| w[1] < w[0]) {
        failures.push("CV SNR not strictly decreasing".into());
    }
    let flags: Vec<bool> = losses.iter().map(|&l| cv_feasibility(&s.cv, l).unwrap().feasible).collect();
    let flips = flags.windows(2).filter(|w| w[0] != w[1]).count();
    if flips != 1 {
        failures.push(format!("CV feasibility flips {flips} times"));
    }
    let cross = hapqkd::qkd::cv_threshold_loss_db(&s.cv).unwrap();
    if (cross - 25.8).abs() > 0.1 {
        failures.push(format!("CV threshold {cross:.3} dB"));
    }

    let mut fig6_cross = f64::NAN;
    for fig in FigurePreset::ALL {
        let spec = fig.spec();
        let a = run_sweep_with(&spec, &s, true).unwrap();
        let b = run_sweep_with(&spec, &s, true).unwrap();
        let c = run_sweep_with(&spec, &s, false).unwrap();
        if a.to_csv() != b.to_csv() || a.to_csv() != c.to_csv() || a.to_json() != c.to_json() {
            failures.push(format!("{} not byte-identical", fig.name()));
        }
        if fig == FigurePreset::Fig6 {
            let x: Vec<f64> = a.column("channel_loss_db").unwrap().into_iter().flatten().collect();
            let q: Vec<f64> = a.column("qber_moonless").unwrap().into_iter().flatten().collect();
            if let Some(i) = q.iter().position(|&v| v > s.dv.qber_limit) {
                fig6_cross = x[i - 1] + (s.dv.qber_limit - q[i - 1]) * (x[i] - x[i - 1]) / (q[i] - q[i - 1]);
            }
        }
    }
    if fig6_cross.is_nan() || (fig6_cross - 52.3).abs() > 0.1 {
        failures.push(format!("fig6 moonless crossing {fig6_cross:.3} dB"));
    }

    let detail = if failures.is_empty() {
        format!(
            "weather, QBER, night spread {:.3} pp, CV crossing {cross:.3} dB, fig6 crossing {fig6_cross:.3} dB, byte-identical sweeps",
            night_spread * 100.0
        )
    } else {
        failures.join("; ")
    };
    check("10 property suites", failures.is_empty(), detail)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let verdicts = [
        night_threshold(),
        daytime_thresholds(),
        background_range(),
        los_span(),
        footprints(),
        regular_elevation_loss(),
        aperture_optimum(),
        divergence_limit(),
        method_dominance(),
        properties(),
    ];
    let mut unexpected = 0;
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {}", v.id, v.detail);
        if !v.pass {
            match v.known_gap {
                Some(reason) => println!("     known gap: {reason}"),
                None => unexpected += 1,
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let in_time = elapsed < 60.0;
    println!("{} runtime: {elapsed:.2} s (limit 60 s)", if in_time { "PASS" } else { "FAIL" });
    if !in_time {
        unexpected += 1;
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance: {passed}/{} criteria passed, {unexpected} unexpected failures", verdicts.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
