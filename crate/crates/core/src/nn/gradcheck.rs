use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};

use super::{ParamStore, Tensor};

/// Denominator floor for [`max_relative_error`]: components whose analytic
/// and numeric magnitudes are both below it are compared against the floor.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// Central-difference gradient of `f` with respect to every scalar of every
/// parameter accepted by `select`.
pub fn finite_diff_grad<F>(mut f: F, store: &ParamStore, eps: f64, select: impl Fn(&str) -> bool) -> BTreeMap<String, Tensor>
where
    F: FnMut(&ParamStore) -> f64,
{
    let mut probe = store.clone();
    let mut out = BTreeMap::new();
    let names: alloc::vec::Vec<String> = store.names().filter(|n| select(n)).map(ToString::to_string).collect();
    for name in names {
        let len = store.value(&name).expect("name from store").len();
        let mut grad = Tensor::zeros(store.value(&name).expect("name from store").shape());
        for i in 0..len {
            let orig = probe.value(&name).expect("present").data()[i];
            probe.value_mut(&name).expect("present").data_mut()[i] = orig + eps;
            let up = f(&probe);
            probe.value_mut(&name).expect("present").data_mut()[i] = orig - eps;
            let down = f(&probe);
            probe.value_mut(&name).expect("present").data_mut()[i] = orig;
            grad.data_mut()[i] = (up - down) / (2.0 * eps);
        }
        out.insert(name, grad);
    }
    out
}

/// Largest `|a − n| / max(|a|, |n|, RELATIVE_ERROR_FLOOR)` over the numeric
/// entries, with the parameter name and index where it occurs. Parameters
/// absent from `analytic` count as zero gradients.
pub fn max_relative_error(
    analytic: &BTreeMap<String, Tensor>,
    numeric: &BTreeMap<String, Tensor>,
) -> (f64, Option<(String, usize)>) {
    let mut worst = (0.0, None);
    for (name, n) in numeric {
        for (i, nv) in n.data().iter().enumerate() {
            let av = analytic.get(name).map_or(0.0, |a| a.data()[i]);
            let denom = av.abs().max(nv.abs()).max(RELATIVE_ERROR_FLOOR);
            let err = (av - nv).abs() / denom;
            if err > worst.0 || worst.1.is_none() {
                worst = (err, Some((name.clone(), i)));
            }
        }
    }
    worst
}
