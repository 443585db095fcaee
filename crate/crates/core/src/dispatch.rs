//! Economic dispatch for a fixed commitment.
//!
//! With linear costs, filling the residual above minimum output in ascending
//! cost order is exactly optimal, so each period is solved independently by a
//! single merit-order pass.

use serde::{Deserialize, Serialize};

use crate::instance::{CommitmentMatrix, UcInstance};

/// Output power per unit and period, MW, stored as rows of units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DispatchMatrix {
    powers: Vec<Vec<f64>>,
}

impl DispatchMatrix {
    pub fn zeros(units: usize, periods: usize) -> Self {
        DispatchMatrix {
            powers: vec![vec![0.0; periods]; units],
        }
    }

    pub fn from_rows(powers: Vec<Vec<f64>>) -> Self {
        DispatchMatrix { powers }
    }

    pub fn num_units(&self) -> usize {
        self.powers.len()
    }

    pub fn num_periods(&self) -> usize {
        self.powers.first().map_or(0, Vec::len)
    }

    #[inline]
    pub fn power(&self, unit: usize, period: usize) -> f64 {
        self.powers[unit][period]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.powers
    }

    /// Σ_i P_i^t for every period.
    pub fn total_generation(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.num_periods()];
        for row in &self.powers {
            for (total, p) in totals.iter_mut().zip(row) {
                *total += p;
            }
        }
        totals
    }
}

/// Unit indices sorted by ascending cost rate, ties by ascending id.
pub fn merit_order(instance: &UcInstance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instance.num_units()).collect();
    order.sort_by(|&a, &b| {
        instance.units[a]
            .cost_rate
            .total_cmp(&instance.units[b].cost_rate)
            .then(a.cmp(&b))
    });
    order
}

/// Assigns powers to committed units.
///
/// Every committed unit starts at `p_min`; any positive residual demand is then
/// filled in merit order up to each unit's `p_max`. When committed minimum
/// output exceeds demand the surplus is left in place, and when committed
/// capacity falls short every committed unit runs at `p_max`.
///
/// Panics if the commitment shape does not match the instance.
pub fn dispatch(instance: &UcInstance, commitment: &CommitmentMatrix) -> DispatchMatrix {
    let order = merit_order(instance);
    dispatch_with_order(instance, commitment, &order)
}

/// [`dispatch`] with a precomputed merit order, for hot loops.
pub fn dispatch_with_order(
    instance: &UcInstance,
    commitment: &CommitmentMatrix,
    order: &[usize],
) -> DispatchMatrix {
    instance
        .check_commitment(commitment)
        .expect("dispatch requires a commitment matching the instance");
    let periods = instance.num_periods();
    let mut out = DispatchMatrix::zeros(instance.num_units(), periods);
    for (t, &demand) in instance.demand.iter().enumerate() {
        let mut residual = demand;
        for (i, unit) in instance.units.iter().enumerate() {
            if commitment.is_on(i, t) {
                out.powers[i][t] = unit.p_min;
                residual -= unit.p_min;
            }
        }
        for &i in order {
            if residual <= 0.0 {
                break;
            }
            if !commitment.is_on(i, t) {
                continue;
            }
            let unit = &instance.units[i];
            let headroom = unit.p_max - unit.p_min;
            if residual >= headroom {
                out.powers[i][t] = unit.p_max;
                residual -= headroom;
            } else {
                out.powers[i][t] = unit.p_min + residual;
                residual = 0.0;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::UnitSpec;
    use proptest::prelude::*;

    fn unit(id: usize, p_min: f64, p_max: f64, rate: f64) -> UnitSpec {
        UnitSpec {
            id,
            p_min,
            p_max,
            cost_rate: rate,
            min_up: 1,
            min_down: 1,
            initial_state: false,
            initial_duration: None,
        }
    }

    #[test]
    fn single_unit_meets_demand() {
        let inst = UcInstance::new(vec![unit(0, 10.0, 100.0, 2.0)], vec![50.0]).unwrap();
        let d = dispatch(&inst, &CommitmentMatrix::from_rows(&[vec![true]]));
        assert_eq!(d.power(0, 0), 50.0);
    }

    #[test]
    fn merit_order_fill() {
        let inst = UcInstance::new(
            vec![unit(0, 10.0, 40.0, 1.0), unit(1, 10.0, 40.0, 5.0)],
            vec![60.0],
        )
        .unwrap();
        let d = dispatch(
            &inst,
            &CommitmentMatrix::from_rows(&[vec![true], vec![true]]),
        );
        assert_eq!(d.power(0, 0), 40.0);
        assert_eq!(d.power(1, 0), 20.0);
        assert_eq!(d.total_generation(), vec![60.0]);
    }

    #[test]
    fn forced_over_generation() {
        let inst = UcInstance::new(
            vec![unit(0, 30.0, 50.0, 1.0), unit(1, 30.0, 50.0, 2.0)],
            vec![40.0],
        )
        .unwrap();
        let d = dispatch(
            &inst,
            &CommitmentMatrix::from_rows(&[vec![true], vec![true]]),
        );
        assert_eq!((d.power(0, 0), d.power(1, 0)), (30.0, 30.0));
        assert_eq!(d.total_generation(), vec![60.0]);
    }

    #[test]
    fn shortfall_runs_everything_at_max() {
        let inst = UcInstance::new(
            vec![unit(0, 10.0, 50.0, 1.0), unit(1, 10.0, 30.0, 2.0)],
            vec![100.0],
        )
        .unwrap();
        let d = dispatch(
            &inst,
            &CommitmentMatrix::from_rows(&[vec![true], vec![true]]),
        );
        assert_eq!(d.total_generation(), vec![80.0]);
    }

    #[test]
    fn equal_rates_fill_lower_id_first() {
        let inst = UcInstance::new(
            vec![unit(0, 0.0, 40.0, 3.0), unit(1, 0.0, 40.0, 3.0)],
            vec![50.0],
        )
        .unwrap();
        let d = dispatch(
            &inst,
            &CommitmentMatrix::from_rows(&[vec![true], vec![true]]),
        );
        assert_eq!((d.power(0, 0), d.power(1, 0)), (40.0, 10.0));
    }

    #[test]
    fn zero_dispatch_totals() {
        assert_eq!(DispatchMatrix::zeros(3, 4).total_generation(), vec![0.0; 4]);
    }

    #[test]
    fn totals_match_column_sums() {
        let rows = vec![
            vec![1.5, 0.0, 2.25, 7.0],
            vec![0.0, 3.0, 4.0, 0.5],
            vec![10.0, 0.125, 0.0, 1.0],
        ];
        let mut expected = [0.0; 4];
        for t in 0..4 {
            for row in &rows {
                expected[t] += row[t];
            }
        }
        let totals = DispatchMatrix::from_rows(rows).total_generation();
        assert_eq!(totals, expected.to_vec());
    }

    fn arb_case() -> impl Strategy<Value = (UcInstance, CommitmentMatrix)> {
        (1usize..5, 1usize..5).prop_flat_map(|(n, t)| {
            let units = prop::collection::vec((0.0f64..50.0, 0.0f64..80.0, 0.0f64..30.0), n);
            let demand = prop::collection::vec(0.0f64..250.0, t);
            let bits = prop::collection::vec(any::<bool>(), n * t);
            (units, demand, bits).prop_map(move |(units, demand, bits)| {
                let units = units
                    .into_iter()
                    .enumerate()
                    .map(|(i, (lo, span, rate))| unit(i, lo, lo + span, rate))
                    .collect();
                let inst = UcInstance::new(units, demand).unwrap();
                (inst, CommitmentMatrix::from_flat(n, t, bits))
            })
        })
    }

    proptest! {
        #[test]
        fn respects_bounds_and_meets_feasible_demand((inst, u) in arb_case()) {
            let d = dispatch(&inst, &u);
            let totals = d.total_generation();
            for (t, &demand) in inst.demand.iter().enumerate() {
                let (mut lo, mut hi) = (0.0, 0.0);
                for (i, unit) in inst.units.iter().enumerate() {
                    let p = d.power(i, t);
                    if u.is_on(i, t) {
                        prop_assert!(p >= unit.p_min && p <= unit.p_max);
                        lo += unit.p_min;
                        hi += unit.p_max;
                    } else {
                        prop_assert_eq!(p, 0.0);
                    }
                }
                if lo <= demand && demand <= hi {
                    prop_assert!((totals[t] - demand).abs() <= 1e-9);
                }
            }
        }

        #[test]
        fn no_cost_reducing_pairwise_shift((inst, u) in arb_case()) {
            let d = dispatch(&inst, &u);
            for t in 0..inst.num_periods() {
                for a in 0..inst.num_units() {
                    for b in 0..inst.num_units() {
                        if a == b || !u.is_on(a, t) || !u.is_on(b, t) {
                            continue;
                        }
                        let (ua, ub) = (&inst.units[a], &inst.units[b]);
                        // Moving output from a to b is feasible only if a can go down and b up.
                        let room = (d.power(a, t) - ua.p_min).min(ub.p_max - d.power(b, t));
                        if room > 1e-9 {
                            prop_assert!(ub.cost_rate >= ua.cost_rate);
                        }
                    }
                }
            }
        }
    }
}
