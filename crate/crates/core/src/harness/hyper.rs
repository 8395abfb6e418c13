//! §V-D hyperparameter study: a `D̂^max` sweep at fixed `Û^max` and a `Û^max`
//! sweep at fixed `D̂^max`, per dataset shape `N × M`.
//!
//! Costs are divided by the normaliser: the mean total penalty of dropping
//! every task of the dataset's scenarios (`Σ (1+δ)·pen_i`).

use std::fmt::Write as _;

use super::plan::{Axis, ExperimentPlan};
use super::{run_plan, HarnessError, ResultTable};
use crate::policies::PolicyId;

/// `D̂^max` values of the distance sweep.
pub const D_HAT_POINTS: [f64; 7] = [2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0];
/// `Û^max` values of the utilisation sweep.
pub const U_HAT_POINTS: [f64; 4] = [0.7, 0.8, 0.9, 1.0];

/// One sweep point: raw means and normalised values.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperPoint {
    pub value: f64,
    pub c_drop: f64,
    pub c_dis: f64,
    pub c_e: f64,
    pub c_total: f64,
    pub norm_c_drop: f64,
    pub norm_c_dis: f64,
    pub norm_c_e: f64,
}

/// One swept hyperparameter with the other held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperSweep {
    /// `d_hat_max` or `u_hat_max`.
    pub parameter: &'static str,
    /// The other hyperparameter's fixed value.
    pub fixed: f64,
    pub points: Vec<HyperPoint>,
}

/// Trade-off tables for one dataset shape.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperStudy {
    /// Tasks per batch `N`.
    pub n_tasks: usize,
    pub n_bs: usize,
    pub policy: PolicyId,
    pub seeds: u64,
    pub normalizer: f64,
    /// `(C_drop, C_dis)` over `D̂^max`.
    pub distance: HyperSweep,
    /// `(C_drop, C_e)` over `Û^max`.
    pub utilisation: HyperSweep,
}

fn sweep(
    table: &ResultTable,
    parameter: &'static str,
    fixed: f64,
    normalizer: f64,
) -> Result<HyperSweep, HarnessError> {
    let points = table
        .aggregate()
        .into_iter()
        .map(|a| {
            let value = a
                .value
                .parse()
                .map_err(|_| HarnessError::Table(format!("bad sweep value `{}`", a.value)))?;
            Ok(HyperPoint {
                value,
                c_drop: a.c_drop,
                c_dis: a.c_dis,
                c_e: a.c_e,
                c_total: a.c_total,
                norm_c_drop: a.c_drop / normalizer,
                norm_c_dis: a.c_dis / normalizer,
                norm_c_e: a.c_e / normalizer,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(HyperSweep {
        parameter,
        fixed,
        points,
    })
}

/// Runs both sweeps for every `(N, M)` dataset on top of `base` (source,
/// seeds, slack, ratio and config), using dynamic holding. The distance sweep
/// holds `Û^max` at `base.cfg.u_hat_max`; the utilisation sweep holds `D̂^max`
/// at `base.cfg.d_hat_max`.
pub fn hyperparameter_study(
    datasets: &[(usize, usize)],
    base: &ExperimentPlan,
) -> Result<Vec<HyperStudy>, HarnessError> {
    let policy = PolicyId::DynamicHolding;
    let mut out = Vec::new();
    for &(n, m) in datasets {
        let plan_for = |axis: Axis, tag: &str| ExperimentPlan {
            name: format!("{}_{tag}_{n}x{m}", base.name),
            axis,
            policies: vec![policy],
            n_tasks: n,
            n_bs: m,
            ..base.clone()
        };
        let d_table = run_plan(&plan_for(Axis::DHat(D_HAT_POINTS.to_vec()), "d_hat"))?;
        let u_table = run_plan(&plan_for(Axis::UHat(U_HAT_POINTS.to_vec()), "u_hat"))?;
        let rows = &d_table.rows;
        let normalizer = rows.iter().map(|r| r.drop_all_penalty).sum::<f64>() / rows.len() as f64;
        out.push(HyperStudy {
            n_tasks: n,
            n_bs: m,
            policy,
            seeds: base.repetitions,
            normalizer,
            distance: sweep(&d_table, "d_hat_max", base.cfg.u_hat_max, normalizer)?,
            utilisation: sweep(&u_table, "u_hat_max", base.cfg.d_hat_max, normalizer)?,
        });
    }
    Ok(out)
}

impl HyperStudy {
    /// CSV with a `#` header line declaring the dataset and normaliser.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# hyperparameter study dataset={}x{} policy={} seeds={} normalizer=drop_all_penalty normalizer_value={}",
            self.n_tasks,
            self.n_bs,
            self.policy.name(),
            self.seeds,
            self.normalizer
        );
        s.push_str("sweep,value,fixed,c_drop,c_dis,c_e,c_total,norm_c_drop,norm_c_dis,norm_c_e\n");
        for sw in [&self.distance, &self.utilisation] {
            for p in &sw.points {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    sw.parameter,
                    p.value,
                    sw.fixed,
                    p.c_drop,
                    p.c_dis,
                    p.c_e,
                    p.c_total,
                    p.norm_c_drop,
                    p.norm_c_dis,
                    p.norm_c_e
                );
            }
        }
        s
    }

    /// `hyper_<N>x<M>.csv`.
    pub fn file_name(&self) -> String {
        format!("hyper_{}x{}.csv", self.n_tasks, self.n_bs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_have_paper_point_counts() {
        let base = ExperimentPlan {
            name: "h".into(),
            repetitions: 1,
            batches: 3,
            processing: (1, 8),
            ..Default::default()
        };
        let studies = hyperparameter_study(&[(6, 5)], &base).unwrap();
        let s = &studies[0];
        assert_eq!(s.distance.points.len(), 7);
        assert_eq!(s.utilisation.points.len(), 4);
        assert!(s.normalizer > 0.0);
        let csv = s.to_csv();
        assert!(csv.starts_with("# hyperparameter study dataset=6x5"));
        assert_eq!(csv.lines().count(), 2 + 11);
    }
}
