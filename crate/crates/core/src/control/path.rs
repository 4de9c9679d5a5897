use crate::engine::Topology;
use crate::packet::NodeId;

use super::session::SliceDescriptor;
use super::ControlError;

/// Candidate nearest to `from` over user-plane links; lowest id on ties.
pub fn nearest(topology: &Topology, from: NodeId, candidates: &[NodeId]) -> Option<NodeId> {
    candidates
        .iter()
        .filter_map(|c| topology.user_hops(from, *c).map(|d| (d, *c)))
        .min()
        .map(|(_, c)| c)
}

/// Target (UL-CL, anchor) for a session moving to `target_ran`.
pub fn smf_select_target_path(
    topology: &Topology,
    slice: &SliceDescriptor,
    target_ran: NodeId,
) -> Result<(NodeId, NodeId), ControlError> {
    let ulcl = nearest(topology, target_ran, &slice.ulcl_candidates).ok_or(ControlError::NoCandidate)?;
    let anchor = nearest(topology, ulcl, &slice.icn_ap_candidates).ok_or(ControlError::NoCandidate)?;
    Ok((ulcl, anchor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Link, Role};

    fn fig4() -> Topology {
        let mut t = Topology::default();
        for (id, role) in [
            (1, Role::Ran),
            (2, Role::Ran),
            (3, Role::UlCl),
            (4, Role::UlCl),
            (5, Role::IcnAp),
            (6, Role::IcnAp),
        ] {
            t.add_node(NodeId(id), &format!("n{id}"), role);
        }
        t.add_link(NodeId(1), NodeId(3), Link::new(5));
        t.add_link(NodeId(2), NodeId(4), Link::new(5));
        t.add_link(NodeId(3), NodeId(5), Link::new(5));
        t.add_link(NodeId(4), NodeId(6), Link::new(5));
        t
    }

    fn slice(ulcls: &[u32], aps: &[u32]) -> SliceDescriptor {
        SliceDescriptor {
            slice_id: "S1".into(),
            ulcl_candidates: ulcls.iter().map(|i| NodeId(*i)).collect(),
            icn_ap_candidates: aps.iter().map(|i| NodeId(*i)).collect(),
        }
    }

    #[test]
    fn picks_ulcl_adjacent_to_target() {
        let t = fig4();
        assert_eq!(
            smf_select_target_path(&t, &slice(&[3, 4], &[5, 6]), NodeId(2)),
            Ok((NodeId(4), NodeId(6)))
        );
        assert_eq!(
            smf_select_target_path(&t, &slice(&[3, 4], &[5, 6]), NodeId(1)),
            Ok((NodeId(3), NodeId(5)))
        );
    }

    #[test]
    fn equidistant_lowest_id() {
        let mut t = Topology::default();
        t.add_node(NodeId(1), "ran", Role::Ran);
        t.add_node(NodeId(4), "u4", Role::UlCl);
        t.add_node(NodeId(7), "u7", Role::UlCl);
        t.add_node(NodeId(9), "ap", Role::IcnAp);
        t.add_link(NodeId(1), NodeId(7), Link::new(1));
        t.add_link(NodeId(1), NodeId(4), Link::new(30));
        t.add_link(NodeId(4), NodeId(9), Link::new(1));
        t.add_link(NodeId(7), NodeId(9), Link::new(1));
        assert_eq!(
            smf_select_target_path(&t, &slice(&[7, 4], &[9]), NodeId(1)),
            Ok((NodeId(4), NodeId(9)))
        );
    }

    #[test]
    fn unreachable_target() {
        let mut t = fig4();
        t.add_node(NodeId(8), "lonely", Role::Ran);
        assert_eq!(
            smf_select_target_path(&t, &slice(&[3, 4], &[5, 6]), NodeId(8)),
            Err(ControlError::NoCandidate)
        );
    }
}
