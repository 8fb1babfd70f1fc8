use serde::{Deserialize, Serialize};

use crate::fleet::{RobotType, TypeCounts};
use crate::topo_map::NodeId;

use super::kmeans::CLUSTERS_PER_TYPE;
use super::pareto::{ParetoNodes, PARETO_SLOTS};
use super::EncodingError;

/// Squads per mission: three per robot type.
pub const SQUADS: usize = 3 * CLUSTERS_PER_TYPE;
/// Node, size and caution output per squad.
pub const ACTION_WIDTH: usize = 3 * SQUADS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SquadCommand {
    pub robot_type: RobotType,
    /// Bin chosen by the node output.
    pub slot: usize,
    pub node: NodeId,
    pub size: usize,
    pub caution: f64,
}

/// Decoded commands for all nine squads; squad `j` has type `j / 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TacticsAction {
    pub squads: Vec<SquadCommand>,
}

impl TacticsAction {
    pub fn squads_of(&self, t: RobotType) -> impl Iterator<Item = &SquadCommand> {
        self.squads.iter().filter(move |s| s.robot_type == t)
    }
}

fn unit(o: f64) -> f64 {
    let o = if o.is_nan() { 0.0 } else { o.clamp(-1.0, 1.0) };
    (o + 1.0) / 2.0
}

/// `floor((o + 1) / 2 * bins)`, clamped to the last bin.
pub fn bin_index(o: f64, bins: usize) -> usize {
    ((unit(o) * bins as f64).floor() as usize).min(bins.saturating_sub(1))
}

/// Split `total` robots by `shares` using largest-remainder rounding.
///
/// All-zero shares split uniformly. Remainder ties go to the lower index.
pub fn split_by_shares(shares: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = shares.iter().sum();
    let weights: Vec<f64> = if sum > 0.0 {
        shares.iter().map(|s| s / sum).collect()
    } else {
        vec![1.0 / shares.len() as f64; shares.len()]
    };
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

fn decode_with(raw: &[f64], idle: TypeCounts, bins: usize, node_of: impl Fn(usize) -> NodeId) -> Result<TacticsAction, EncodingError> {
    if raw.len() != ACTION_WIDTH {
        return Err(EncodingError::ActionWidth { expected: ACTION_WIDTH, found: raw.len() });
    }
    let (node_out, rest) = raw.split_at(SQUADS);
    let (size_out, caution_out) = rest.split_at(SQUADS);
    let mut squads = Vec::with_capacity(SQUADS);
    for t in RobotType::ALL {
        let range = t.index() * CLUSTERS_PER_TYPE..(t.index() + 1) * CLUSTERS_PER_TYPE;
        let shares: Vec<f64> = size_out[range.clone()].iter().map(|&o| unit(o)).collect();
        let sizes = split_by_shares(&shares, idle[t]);
        for (k, j) in range.enumerate() {
            let slot = bin_index(node_out[j], bins);
            squads.push(SquadCommand {
                robot_type: t,
                slot,
                node: node_of(slot),
                size: sizes[k],
                caution: unit(caution_out[j]),
            });
        }
    }
    Ok(TacticsAction { squads })
}

/// Decode 27 outputs in `[-1, 1]` into squad commands over the 8 Pareto nodes.
///
/// Layout: 9 node outputs, 9 size outputs, 9 caution outputs; squad `j`
/// belongs to type `j / 3`. Sizes split the idle robots of each type.
pub fn decode_action(raw: &[f64], idle: TypeCounts, pareto: &ParetoNodes) -> Result<TacticsAction, EncodingError> {
    let slots = pareto.slots();
    decode_with(raw, idle, PARETO_SLOTS, |i| slots[i])
}

/// Decode with destinations binned over every graph node id.
pub fn decode_action_raw(raw: &[f64], idle: TypeCounts, node_count: usize) -> Result<TacticsAction, EncodingError> {
    if node_count == 0 {
        return Err(EncodingError::EmptyGraph);
    }
    decode_with(raw, idle, node_count, NodeId)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pareto() -> ParetoNodes {
        ParetoNodes {
            plain: [NodeId(10), NodeId(11), NodeId(12), NodeId(13), NodeId(14)],
            cautious: [NodeId(20), NodeId(21), NodeId(22)],
        }
    }

    #[test]
    fn node_bins_cover_extremes() {
        assert_eq!(bin_index(-1.0, 8), 0);
        assert_eq!(bin_index(1.0, 8), 7);
        assert_eq!(bin_index(0.0, 8), 4);
        assert_eq!(bin_index(f64::NAN, 8), 4);
        assert_eq!(bin_index(5.0, 8), 7);
    }

    #[test]
    fn uniform_fallback() {
        assert_eq!(split_by_shares(&[0.0, 0.0, 0.0], 9), vec![3, 3, 3]);
    }

    #[test]
    fn largest_remainder() {
        assert_eq!(split_by_shares(&[0.5, 0.5, 0.0], 10), vec![5, 5, 0]);
        // 7 * (1/3) = 2.33 each: one leftover goes to the lowest index.
        assert_eq!(split_by_shares(&[1.0, 1.0, 1.0], 7), vec![3, 2, 2]);
        // 0.2, 0.3, 0.5 of 4 = 0.8, 1.2, 2.0 -> floors 0,1,2, leftover to 0.8.
        assert_eq!(split_by_shares(&[0.2, 0.3, 0.5], 4), vec![1, 1, 2]);
    }

    #[test]
    fn decode_layout() {
        let mut raw = vec![-1.0; ACTION_WIDTH];
        raw[0] = 1.0;
        raw[SQUADS + 3] = 1.0;
        raw[2 * SQUADS + 8] = 0.0;
        let a = decode_action(&raw, TypeCounts::new(9, 5, 0), &pareto()).unwrap();
        assert_eq!(a.squads.len(), 9);
        assert_eq!(a.squads[0].node, NodeId(22));
        assert_eq!(a.squads[1].node, NodeId(10));
        let sizes: Vec<usize> = a.squads.iter().map(|s| s.size).collect();
        assert_eq!(sizes, vec![3, 3, 3, 5, 0, 0, 0, 0, 0]);
        assert_eq!(a.squads[8].caution, 0.5);
        assert_eq!(a.squads[8].robot_type, RobotType::UavB);
    }

    #[test]
    fn wrong_width_is_an_error() {
        assert_eq!(
            decode_action(&[0.0; 26], TypeCounts::default(), &pareto()),
            Err(EncodingError::ActionWidth { expected: 27, found: 26 })
        );
    }

    #[test]
    fn raw_decode_uses_all_nodes() {
        let mut raw = vec![0.0; ACTION_WIDTH];
        raw[0] = 1.0;
        raw[1] = -1.0;
        let a = decode_action_raw(&raw, TypeCounts::new(3, 3, 3), 40).unwrap();
        assert_eq!(a.squads[0].node, NodeId(39));
        assert_eq!(a.squads[1].node, NodeId(0));
    }
}
