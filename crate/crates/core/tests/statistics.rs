//! Statistical invariants that need more samples than a unit test should draw.

use cvqec::decoder::{build_covariance, WhitenedDecoder};
use cvqec::gkp::run_suppression_round;
use cvqec::phase_space::{NoiseParams, Quadrature, RngStream, Squeezing, CODE_SIZE};
use cvqec::simulator::{Mode, ScenarioConfig, Simulator};
use cvqec::steane::SyndromeModel;

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

#[test]
fn whitened_statistics_have_unit_variance_under_noise() {
    let model = SyndromeModel::standard();
    for (q, squeezing) in [(Quadrature::X, Squeezing::Ideal), (Quadrature::P, Squeezing::Finite { r: 1.0 })] {
        let s2 = 0.1;
        let cov = build_covariance(&model, q, s2, squeezing).unwrap();
        let dec = WhitenedDecoder::new(&model, &cov);
        let peak = (0.5 * squeezing.noise_factor()).sqrt();
        let mut stream = RngStream::new(41, q as u64);
        let n = 100_000;
        let mut t: Vec<Vec<f64>> = (0..CODE_SIZE).map(|_| Vec::with_capacity(n)).collect();
        for _ in 0..n {
            let eps: [f64; CODE_SIZE] = std::array::from_fn(|_| s2.sqrt() * stream.standard_normal());
            let mut s = [0.0; 3];
            for (r, si) in s.iter_mut().enumerate() {
                *si = (0..CODE_SIZE).map(|k| model.signature(q)[r][k] as f64 * eps[k]).sum::<f64>();
                // A = [I | I]: two ancilla terms per syndrome
                *si += peak * (stream.standard_normal() + stream.standard_normal());
            }
            let res = dec.decode(&s, 4.0).unwrap();
            for (tj, v) in t.iter_mut().zip(res.t) {
                tj.push(v);
            }
        }
        for (j, tj) in t.iter().enumerate() {
            let v = variance(tj);
            assert!((v - 1.0).abs() < 0.03, "{q} T_{}: variance {v}", j + 1);
        }
    }
}

#[test]
fn scenario_ordering_and_suppression() {
    let base = ScenarioConfig { trajectories: 2000, rounds: 1000, master_seed: 3, abrupt: None, ..Default::default() };
    let std_of = |mode| Simulator::new(ScenarioConfig { mode, ..base.clone() }).unwrap().run(0, 0).unwrap().final_std();
    let a = std_of(Mode::NoQec);
    let b = std_of(Mode::GkpOnly);
    let c = std_of(Mode::Concatenated);
    assert!(a > b && a > c, "{a} {b} {c}");
    assert!((b / c - 1.0).abs() < 0.06, "{b} vs {c}");
    assert!((a / 200f64.sqrt() - 1.0).abs() < 0.05, "{a}");
    // exact inner residual variance at sigma^2 = 0.2 is 0.1159, i.e. a ratio of 0.58
    let ratio = (b / a).powi(2);
    assert!((0.50..0.66).contains(&ratio), "{ratio}");
}

#[test]
fn concatenated_finite_squeezing_tracks_residual_formula() {
    let r = 0.5 * 10f64.ln();
    let cfg = ScenarioConfig {
        mode: Mode::Concatenated,
        sigma_sq: 0.04,
        squeezing: Squeezing::Finite { r },
        rounds: 100,
        trajectories: 4000,
        abrupt: None,
        master_seed: 17,
        ..Default::default()
    };
    let stats = Simulator::new(cfg).unwrap().run(0, 0).unwrap();
    let per_round = stats.final_std().powi(2) / 100.0;
    let expect = 0.02 + 0.1 / 8.0;
    assert!((per_round / expect - 1.0).abs() < 0.05, "{per_round} vs {expect}");
}

#[test]
fn gkp_only_small_sigma_per_round_variance_is_half() {
    let params = NoiseParams::new(0.1, Squeezing::Ideal).unwrap();
    let mut s = RngStream::new(8, 0);
    let xi: Vec<f64> = (0..400_000).map(|_| run_suppression_round(&mut s, &params).unwrap().xi_p_data).collect();
    assert!((variance(&xi) / 0.005 - 1.0).abs() < 0.01);
}
