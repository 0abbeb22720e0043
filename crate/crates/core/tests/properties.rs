use qda_core::adaptive::{run_stages_with, StageOptions, StageSpec};
use qda_core::baselines::{column_means, exact_mc, ExactModel};
use qda_core::experiments::{self, cauchy_standard, mean_std};
use qda_core::metrics::{kolmogorov, kolmogorov_between_1d, CdfOracle, DiscreteMeasure};
use qda_core::models::{BetaMixture, LinRegData, MvNormalTarget};
use qda_core::posterior::discretize_with;
use qda_core::proposal::{Proposal, ProposalBlock};
use qda_core::qmc::{midpoint_grid_1d, sobol_points};
use qda_core::sampling::{draw, representation_points};

fn unit() -> Proposal {
    Proposal::single(ProposalBlock::unit_box(1).unwrap())
}

#[test]
fn representation_kd_within_composite_bound() {
    let b = BetaMixture::beta(2.0, 3.0).unwrap();
    let oracle = CdfOracle::univariate(|x| b.cdf(x));
    for n in [10usize, 100, 1000] {
        let dp = discretize_with(&b, &unit(), &midpoint_grid_1d(n).unwrap(), 1).unwrap();
        let kd_dp = kolmogorov(&DiscreteMeasure::from_posterior(&dp), &oracle).unwrap().value;
        let rp = representation_points(&dp, n).unwrap();
        let kd_rp = kolmogorov(&DiscreteMeasure::from_representation(&rp), &oracle).unwrap().value;
        assert!(kd_rp <= kd_dp + 1.5, "N={n}: {kd_rp} vs {kd_dp}");
        // Much tighter in practice: one atom of slack.
        assert!(kd_rp <= kd_dp + 1.5 / n as f64, "N={n}: {kd_rp} vs {kd_dp}");
    }
}

#[test]
fn draw_kd_scales_like_root_n() {
    let dp = experiments::beta_mixture_da(30).unwrap();
    let exact = DiscreteMeasure::from_posterior(&dp);
    for (k, n) in [100usize, 1000, 10_000].into_iter().enumerate() {
        let xs: Vec<f64> = draw(&dp, n, 11 + k as u64).into_iter().map(|x| x[0]).collect();
        let kd = kolmogorov_between_1d(&DiscreteMeasure::empirical_1d(&xs).unwrap(), &exact).unwrap();
        // The Kolmogorov limit law puts sqrt(N) KD above 2 with probability < 1e-3.
        assert!(kd * (n as f64).sqrt() < 2.0, "N={n}: {kd}");
    }
}

#[test]
fn second_stage_improves_the_mean() {
    let t = MvNormalTarget::benchmark();
    let mu = t.mean();
    for skip in [1u64, 1001, 2001, 3001, 4001] {
        let opts = StageOptions {
            base_skip: skip,
            workers: 2,
            ..StageOptions::default()
        };
        let (_, reports) = run_stages_with(
            &t,
            &cauchy_standard(2),
            &[StageSpec::sobol(1000), StageSpec::sobol(1000)],
            2,
            &opts,
        )
        .unwrap();
        let se = |m: &[f64]| (m[0] - mu[0]).powi(2) + (m[1] - mu[1]).powi(2);
        let (s1, s2) = (se(&reports[0].mean), se(&reports[1].mean));
        assert!(s2 < s1, "skip {skip}: stage 1 {s1:e}, stage 2 {s2:e}");
        assert_eq!(reports.iter().map(|r| r.stage_index).collect::<Vec<_>>(), vec![1, 2]);
    }
}

#[test]
fn one_stage_equals_plain_discretization() {
    let t = MvNormalTarget::benchmark();
    let (dp, reports) = run_stages_with(
        &t,
        &cauchy_standard(2),
        &[StageSpec::sobol(500)],
        1,
        &StageOptions::default(),
    )
    .unwrap();
    let plain = discretize_with(&t, &cauchy_standard(2), &sobol_points(500, 2, 1).unwrap(), 1).unwrap();
    assert_eq!(dp.masses(), plain.masses());
    assert_eq!(reports.len(), 1);
}

#[test]
fn mixture_baselines_have_expected_magnitude() {
    let t = experiments::table1(100, 42, 4).unwrap();
    for (method, want) in [("MCMC", 0.0121), ("Exact MC", 0.0082)] {
        let r = t.row(method, "M=10").unwrap();
        let se = r.values[0];
        let slack = 3.0 * se.std / (r.reps as f64).sqrt();
        assert!((se.mean - want).abs() < slack, "{method}: {} vs {want} (+/- {slack})", se.mean);
    }
}

#[test]
fn linreg_exact_draws_match_closed_form() {
    let data = LinRegData::synthetic(50, 5, 9).unwrap();
    let draws = exact_mc(ExactModel::LinReg(&data), 20_000, 4);
    let m = column_means(&draws);
    for (k, want) in [(1, data.gamma_hat()[1]), (6, data.exact_sigma2_mean())] {
        let col: Vec<f64> = draws.iter().map(|x| x[k]).collect();
        let se = mean_std(&col).1 / (col.len() as f64).sqrt();
        assert!((m[k] - want).abs() < 4.0 * se, "coord {k}: {} vs {want}", m[k]);
    }
}

#[test]
fn mixture_rows_reproduce() {
    let dp = experiments::beta_mixture_da(10).unwrap();
    let (se, kd) = experiments::beta_mixture_errors(&DiscreteMeasure::from_posterior(&dp)).unwrap();
    assert!((se / 2.1613e-5 - 1.0).abs() < 0.01);
    assert!((kd / 0.0872 - 1.0).abs() < 0.01);
}
