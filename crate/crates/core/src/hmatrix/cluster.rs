use crate::geometry::BBox;

use super::HMatrixError;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    /// Start of the index range in the permuted order.
    pub lo: usize,
    pub len: usize,
    /// Union of the support boxes of the contained dofs.
    pub bbox: BBox,
    pub children: Option<[usize; 2]>,
    pub level: usize,
}

impl ClusterNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.lo..self.lo + self.len
    }
}

/// Binary cluster tree. Node 0 is the root; `perm[k]` is the original index
/// of the dof at permuted position `k`.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    nodes: Vec<ClusterNode>,
    perm: Vec<usize>,
    c_small: usize,
}

impl ClusterTree {
    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &ClusterNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> &ClusterNode {
        &self.nodes[0]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn c_small(&self) -> usize {
        self.c_small
    }

    /// Largest leaf level (the root has level 0).
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }
}

/// Splits along the longest axis of the cluster box at its midpoint, sorting
/// dofs by support-box centre. If every centre lands on one side the split
/// falls back to the median along that axis.
pub fn build_cluster_tree(boxes: &[BBox], c_small: usize) -> Result<ClusterTree, HMatrixError> {
    if boxes.is_empty() {
        return Err(HMatrixError::Empty);
    }
    if c_small == 0 {
        return Err(HMatrixError::InvalidParameter(
            "C_small must be at least 1".into(),
        ));
    }
    let centres: Vec<[f64; 2]> = boxes.iter().map(BBox::center).collect();
    let mut perm: Vec<usize> = (0..boxes.len()).collect();
    let mut nodes = Vec::new();
    split(boxes, &centres, &mut perm, 0, 0, c_small, &mut nodes);
    Ok(ClusterTree {
        nodes,
        perm,
        c_small,
    })
}

fn split(
    boxes: &[BBox],
    centres: &[[f64; 2]],
    perm: &mut [usize],
    offset: usize,
    level: usize,
    c_small: usize,
    nodes: &mut Vec<ClusterNode>,
) -> usize {
    let bbox = perm
        .iter()
        .map(|&i| boxes[i])
        .reduce(|a, b| a.union(&b))
        .expect("nonempty cluster");
    let id = nodes.len();
    nodes.push(ClusterNode {
        lo: offset,
        len: perm.len(),
        bbox,
        children: None,
        level,
    });
    if perm.len() <= c_small {
        return id;
    }
    let axis = if bbox.extent(1) > bbox.extent(0) {
        1
    } else {
        0
    };
    let mid = bbox.center()[axis];
    // stable partition keeps the original order inside each half
    let (mut left, mut right): (Vec<usize>, Vec<usize>) =
        perm.iter().partition(|&&i| centres[i][axis] < mid);
    if left.is_empty() || right.is_empty() {
        let mut all = perm.to_vec();
        all.sort_by(|&a, &b| {
            centres[a][axis]
                .total_cmp(&centres[b][axis])
                .then(a.cmp(&b))
        });
        right = all.split_off(all.len() / 2);
        left = all;
    }
    let nl = left.len();
    perm[..nl].copy_from_slice(&left);
    perm[nl..].copy_from_slice(&right);
    let (pl, pr) = perm.split_at_mut(nl);
    let a = split(boxes, centres, pl, offset, level + 1, c_small, nodes);
    let b = split(boxes, centres, pr, offset + nl, level + 1, c_small, nodes);
    nodes[id].children = Some([a, b]);
    id
}
