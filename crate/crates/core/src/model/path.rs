//! Passage times along explicit paths.

use crate::error::{config, Error, Result};

use super::clock::{sample_clock, ClockKey, ClockKind};
use super::field::ClockSource;
use super::params::{ModelParams, TopologyKind};
use super::site::SiteId;

/// Sum of the per-edge clocks of family `kind` along `path`.
///
/// On the tree, `kind = T2` means "type-2 travel": downward steps read
/// `Td` and upward steps read `Tu`. `Tu`/`Td` read that family on every
/// edge regardless of direction.
pub fn path_time<F: ClockSource + ?Sized>(
    field: &F,
    params: &ModelParams,
    path: &[SiteId],
    kind: ClockKind,
) -> Result<f64> {
    match (params.topology, kind) {
        (_, ClockKind::T1)
        | (TopologyKind::Tree, ClockKind::Tu | ClockKind::Td | ClockKind::T2)
        | (TopologyKind::Lattice, ClockKind::T2 | ClockKind::T3) => {}
        _ => {
            return config(format!(
                "{kind:?} passage times undefined on {:?}",
                params.topology
            ))
        }
    }
    let mut total = 0.0;
    for w in path.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.topology() != params.topology || b.topology() != params.topology {
            return Err(Error::Path("site from the wrong topology".into()));
        }
        let edge_kind = match (params.topology, kind) {
            (TopologyKind::Tree, ClockKind::T2) => {
                let (x, y) = (a.as_tree().unwrap(), b.as_tree().unwrap());
                if y.is_child_of(x) {
                    ClockKind::Td
                } else {
                    ClockKind::Tu
                }
            }
            _ => kind,
        };
        let key = ClockKey::edge(edge_kind, a, b)?;
        total += sample_clock(field, params, &key)?;
    }
    Ok(total)
}
