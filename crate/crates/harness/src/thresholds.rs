//! Pass/fail thresholds applied by `vistac report --check`.

use crate::experiments::{e5_condition, e7_condition};
use crate::report::{ExperimentId, ExperimentReport};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn m(r: &ExperimentReport, cond: &str, key: &str) -> f64 {
    r.metric(cond, key).unwrap_or(f64::NAN)
}

/// Threshold checks that apply to the report's experiment; empty when none do.
pub fn checks(r: &ExperimentReport) -> Vec<Check> {
    match r.id {
        ExperimentId::E1 | ExperimentId::E1b => {
            let mut v = Vec::new();
            if r.condition("unseen_backgrounds").is_some() {
                let a = m(r, "unseen_backgrounds", "accuracy");
                v.push(check("unseen backgrounds GOD accuracy >= 0.85", a >= 0.85, format!("{a:.4}")));
            }
            let a = m(r, "unseen_classes", "accuracy");
            v.push(check("unseen classes GOD accuracy >= 0.80", a >= 0.80, format!("{a:.4}")));
            v
        }
        ExperimentId::E1c => {
            let (ga, ba) = (m(r, "gaussian", "accuracy"), m(r, "binary", "accuracy"));
            let (gd, bd) = (m(r, "gaussian", "mean_argmax_dist_px"), m(r, "binary", "mean_argmax_dist_px"));
            vec![
                check("gaussian accuracy > binary accuracy", ga > ba, format!("{ga:.4} vs {ba:.4}")),
                check("gaussian argmax distance <= 0.7 x binary", gd <= 0.7 * bd, format!("{gd:.3} vs {bd:.3}")),
            ]
        }
        ExperimentId::E4 => {
            let f = m(r, "classify_heavy_fusion", "min_accuracy");
            let vis = m(r, "classify_heavy_visual_only", "accuracy");
            let fh = m(r, "classify_heavy_fusion", "accuracy");
            let fs = m(r, "classify_standard_fusion", "min_accuracy");
            vec![
                check("heavy: fusion - visual_only >= 0.20", fh - vis >= 0.20, format!("{fh:.4} - {vis:.4} (min fusion {f:.4})")),
                check("standard: fusion >= 0.95 on every seed", fs >= 0.95, format!("{fs:.4}")),
            ]
        }
        ExperimentId::E5 => {
            let j = r
                .conditions
                .iter()
                .filter_map(|c| c.get("jitter_mm"))
                .fold(0.0, f64::max);
            let cal = m(r, &e5_condition(true, j), "success_rate");
            let dir = m(r, &e5_condition(false, j), "success_rate");
            let cal0 = m(r, &e5_condition(true, 0.0), "success_rate");
            let dir0 = m(r, &e5_condition(false, 0.0), "success_rate");
            vec![
                check("jittered: calibrated - direct >= 0.25", cal - dir >= 0.25, format!("{cal:.4} - {dir:.4}")),
                check("no jitter: both >= 0.98", cal0 >= 0.98 && dir0 >= 0.98, format!("{cal0:.4}, {dir0:.4}")),
            ]
        }
        ExperimentId::E6 => {
            let u = m(r, "undulating", "ths_within_delta");
            let s = m(r, "stacked", "top_down_rate");
            vec![
                check("undulating: every contact within delta", u == 1.0, format!("{u:.4}")),
                check("stacked: every episode top-down", s == 1.0, format!("{s:.4}")),
            ]
        }
        ExperimentId::E7 => {
            let steps: Vec<f64> = r.conditions.iter().filter_map(|c| c.get("step_mm")).collect();
            let succ: Vec<f64> = steps.iter().map(|&l| m(r, &e7_condition(l), "success_rate")).collect();
            let time: Vec<f64> = steps.iter().map(|&l| m(r, &e7_condition(l), "mean_success_time_s")).collect();
            let mono = succ.windows(2).all(|w| w[0] >= w[1]);
            let dec = time.windows(2).all(|w| w[0] > w[1]);
            let mut v = vec![
                check("success non-increasing in step", mono, format!("{succ:?}")),
                check("mean time strictly decreasing in step", dec, format!("{time:?}")),
            ];
            if let (Some(&l), Some(&s)) = (steps.first(), succ.first()) {
                let w = m(r, &e7_condition(l), "min_footprint_width");
                if l < w {
                    v.push(check("smallest step: success >= 0.85", s >= 0.85, format!("{s:.4} (pitch {l} < width {w:.1})")));
                }
            }
            v
        }
        ExperimentId::E2 | ExperimentId::E3 => Vec::new(),
    }
}
