//! Rooted label trees.
//!
//! A [`Taxonomy`] is immutable once built. Node ids are assigned in pre-order
//! starting from the root (id 0), and children keep the order of the source
//! document, so iterating ids in ascending order is a pre-order walk.
//!
//! Depth counts edges from the root; the root has depth 0.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Nested `name` / `children` description of a tree, the on-disk format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeSpec>,
}

impl TreeSpec {
    pub fn leaf(name: impl Into<String>) -> Self {
        TreeSpec {
            name: name.into(),
            children: Vec::new(),
        }
    }

    pub fn node(name: impl Into<String>, children: Vec<TreeSpec>) -> Self {
        TreeSpec {
            name: name.into(),
            children,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaxonomyNode {
    pub id: NodeId,
    pub name: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
}

/// One classification level: every node at `depth`, plus every leaf that
/// sits above it (those leaves keep their own label at deeper levels).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    pub depth: usize,
    pub classes: Vec<NodeId>,
}

impl Level {
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.classes.binary_search(&node).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Taxonomy {
    nodes: Vec<TaxonomyNode>,
    leaves: Vec<NodeId>,
    depths: Vec<usize>,
    by_name: HashMap<String, NodeId>,
    height: usize,
    diameter: usize,
}

impl Taxonomy {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self> {
        let mut nodes: Vec<TaxonomyNode> = Vec::new();
        let mut depths = Vec::new();
        let mut by_name = HashMap::new();

        // explicit stack keeps pre-order without recursion
        let mut stack: Vec<(&TreeSpec, Option<NodeId>, usize)> = vec![(spec, None, 0)];
        while let Some((item, parent, depth)) = stack.pop() {
            if item.name.is_empty() {
                return Err(Error::MalformedTaxonomy("node with empty name".into()));
            }
            let id = nodes.len();
            if by_name.insert(item.name.clone(), id).is_some() {
                return Err(Error::DuplicateName(item.name.clone()));
            }
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            nodes.push(TaxonomyNode {
                id,
                name: item.name.clone(),
                parent,
                children: Vec::with_capacity(item.children.len()),
            });
            depths.push(depth);
            for child in item.children.iter().rev() {
                stack.push((child, Some(id), depth + 1));
            }
        }

        let leaves: Vec<NodeId> = nodes.iter().filter(|n| n.children.is_empty()).map(|n| n.id).collect();
        let (height, diameter) = height_and_diameter_of(&nodes, &depths);
        Ok(Taxonomy {
            nodes,
            leaves,
            depths,
            by_name,
            height,
            diameter,
        })
    }

    /// Parses the JSON document format: one top-level object with `name` and
    /// optional `children`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::EmptyDocument);
        }
        let value: serde_json::Value = serde_json::from_str(text)?;
        match &value {
            serde_json::Value::Null => return Err(Error::EmptyDocument),
            serde_json::Value::Object(map) if map.is_empty() => return Err(Error::EmptyDocument),
            serde_json::Value::Object(_) => {}
            _ => return Err(Error::MalformedTaxonomy("top level must be a single object".into())),
        }
        let spec: TreeSpec = serde_json::from_value(value)?;
        Self::from_spec(&spec)
    }

    /// Builds a tree from flat `(name, parent)` links. Children keep the order
    /// in which they appear in `links`.
    pub fn from_parent_links<S: AsRef<str>>(links: &[(S, Option<S>)]) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let mut index = HashMap::new();
        for (i, (name, _)) in links.iter().enumerate() {
            if index.insert(name.as_ref(), i).is_some() {
                return Err(Error::DuplicateName(name.as_ref().to_string()));
            }
        }
        let mut parent = vec![None; links.len()];
        for (i, (_, p)) in links.iter().enumerate() {
            if let Some(p) = p {
                let pi = *index
                    .get(p.as_ref())
                    .ok_or_else(|| Error::MalformedTaxonomy(format!("unknown parent `{}`", p.as_ref())))?;
                parent[i] = Some(pi);
            }
        }
        // every node must reach a parentless node within n steps
        for start in 0..links.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                cur = p;
                steps += 1;
                if steps > links.len() {
                    return Err(Error::Cycle(links[start].0.as_ref().to_string()));
                }
            }
        }
        let roots: Vec<usize> = (0..links.len()).filter(|&i| parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::MalformedTaxonomy(format!(
                "expected exactly one root, found {}",
                roots.len()
            )));
        }
        let mut children = vec![Vec::new(); links.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        fn build<S: AsRef<str>>(i: usize, links: &[(S, Option<S>)], children: &[Vec<usize>]) -> TreeSpec {
            TreeSpec {
                name: links[i].0.as_ref().to_string(),
                children: children[i].iter().map(|&c| build(c, links, children)).collect(),
            }
        }
        Self::from_spec(&build(roots[0], links, &children))
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_spec(&self) -> TreeSpec {
        fn build(t: &Taxonomy, id: NodeId) -> TreeSpec {
            let n = &t.nodes[id];
            TreeSpec {
                name: n.name.clone(),
                children: n.children.iter().map(|&c| build(t, c)).collect(),
            }
        }
        build(self, self.root())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("tree spec serialises")
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn nodes(&self) -> &[TaxonomyNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&TaxonomyNode> {
        self.nodes.get(id).ok_or(Error::InvalidNode(id))
    }

    /// Name of a node. Panics on an invalid id.
    pub fn name(&self, id: NodeId) -> &str {
        &self.nodes[id].name
    }

    pub fn id_of(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn leaf_id(&self, name: &str) -> Result<NodeId> {
        let id = self.id_of(name).ok_or_else(|| Error::UnknownLeaf(name.to_string()))?;
        if !self.is_leaf(id) {
            return Err(Error::NotALeaf(name.to_string()));
        }
        Ok(id)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].children.is_empty()
    }

    /// Leaves in pre-order.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn depth(&self, id: NodeId) -> Result<usize> {
        self.depths.get(id).copied().ok_or(Error::InvalidNode(id))
    }

    pub(crate) fn depth_of(&self, id: NodeId) -> usize {
        self.depths[id]
    }

    /// Walks from `id` up to the root, `id` included.
    pub fn path_to_root(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(Some(id), move |&n| self.nodes[n].parent)
    }

    pub fn is_ancestor_or_self(&self, ancestor: NodeId, descendant: NodeId) -> bool {
        let (da, dd) = (self.depths[ancestor], self.depths[descendant]);
        dd >= da && self.ancestor_at_depth(descendant, da) == ancestor
    }

    /// Ancestor-or-self of `id` at `depth`, clamped to `id` itself when
    /// `depth` is below it.
    pub fn ancestor_at_depth(&self, id: NodeId, depth: usize) -> NodeId {
        let mut cur = id;
        while self.depths[cur] > depth {
            cur = self.nodes[cur].parent.expect("non-root node has a parent");
        }
        cur
    }

    pub fn lca(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.node(a)?;
        self.node(b)?;
        let (mut a, mut b) = (a, b);
        while self.depths[a] > self.depths[b] {
            a = self.nodes[a].parent.expect("deeper node has a parent");
        }
        while self.depths[b] > self.depths[a] {
            b = self.nodes[b].parent.expect("deeper node has a parent");
        }
        while a != b {
            a = self.nodes[a].parent.expect("distinct nodes below root");
            b = self.nodes[b].parent.expect("distinct nodes below root");
        }
        Ok(a)
    }

    /// Edge count from `descendant` up to `ancestor`.
    pub fn node_distance(&self, descendant: NodeId, ancestor: NodeId) -> Result<usize> {
        self.node(descendant)?;
        self.node(ancestor)?;
        if !self.is_ancestor_or_self(ancestor, descendant) {
            return Err(Error::NotAncestor { descendant, ancestor });
        }
        Ok(self.depths[descendant] - self.depths[ancestor])
    }

    /// `(H, D)`: edges on the longest root-to-leaf path and on the longest
    /// leaf-to-leaf path.
    pub fn height_and_diameter(&self) -> (usize, usize) {
        (self.height, self.diameter)
    }

    pub fn subtree_leaves(&self, id: NodeId) -> Vec<NodeId> {
        self.leaves
            .iter()
            .copied()
            .filter(|&l| self.is_ancestor_or_self(id, l))
            .collect()
    }

    /// The mapping from a node to the samples under it.
    pub fn node_samples(&self, dataset: &Dataset, id: NodeId) -> Result<BTreeSet<usize>> {
        self.node(id)?;
        let leaves = dataset.leaf_nodes(self)?;
        Ok(leaves
            .iter()
            .enumerate()
            .filter(|(_, &leaf)| self.is_ancestor_or_self(id, leaf))
            .map(|(i, _)| i)
            .collect())
    }

    /// Classification levels with more than one class, shallowest first.
    ///
    /// Level `d` holds the nodes at depth `d` plus every leaf shallower than
    /// `d`, so each sample has exactly one target per level and the deepest
    /// level is the full leaf set.
    pub fn levels_with_multiple_classes(&self) -> Vec<Level> {
        (1..=self.height)
            .map(|depth| Level {
                depth,
                classes: (0..self.nodes.len())
                    .filter(|&n| self.depths[n] == depth || (self.depths[n] < depth && self.is_leaf(n)))
                    .collect(),
            })
            .filter(|level| level.classes.len() > 1)
            .collect()
    }

    pub fn target_at_level(&self, leaf: NodeId, level: usize) -> Result<NodeId> {
        self.node(leaf)?;
        if level == 0 || level > self.height {
            return Err(Error::NotATargetLevel(level));
        }
        if !self.levels_with_multiple_classes().iter().any(|l| l.depth == level) {
            return Err(Error::NotATargetLevel(level));
        }
        Ok(self.ancestor_at_depth(leaf, level))
    }
}

fn height_and_diameter_of(nodes: &[TaxonomyNode], depths: &[usize]) -> (usize, usize) {
    let height = nodes
        .iter()
        .filter(|n| n.children.is_empty())
        .map(|n| depths[n.id])
        .max()
        .unwrap_or(0);
    // longest downward edge count to a leaf, filled children-first
    let mut down = vec![0usize; nodes.len()];
    let mut diameter = 0;
    for n in nodes.iter().rev() {
        let mut best = [0usize; 2];
        for &c in &n.children {
            let len = down[c] + 1;
            if len > best[0] {
                best = [len, best[0]];
            } else if len > best[1] {
                best[1] = len;
            }
        }
        down[n.id] = best[0];
        if n.children.len() >= 2 {
            diameter = diameter.max(best[0] + best[1]);
        }
    }
    (height, diameter)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// root -> {A -> {a1, a2}, B -> {b1}}
    pub(crate) fn small_tree() -> Taxonomy {
        Taxonomy::from_spec(&TreeSpec::node(
            "root",
            vec![
                TreeSpec::node("A", vec![TreeSpec::leaf("a1"), TreeSpec::leaf("a2")]),
                TreeSpec::node("B", vec![TreeSpec::leaf("b1")]),
            ],
        ))
        .unwrap()
    }

    fn id(t: &Taxonomy, name: &str) -> NodeId {
        t.id_of(name).unwrap()
    }

    #[test]
    fn t0_structure() {
        let t = small_tree();
        assert_eq!(t.len(), 6);
        assert_eq!(t.leaves().len(), 3);
        assert_eq!(t.depth(t.root()).unwrap(), 0);
        let names: Vec<&str> = (0..t.len()).map(|i| t.name(i)).collect();
        assert_eq!(names, ["root", "A", "a1", "a2", "B", "b1"]);
    }

    #[test]
    fn single_node_is_leaf() {
        let t = Taxonomy::from_json_str(r#"{"name": "root"}"#).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.is_leaf(t.root()));
        assert_eq!(t.height_and_diameter(), (0, 0));
        assert!(t.levels_with_multiple_classes().is_empty());
    }

    #[test]
    fn parse_errors() {
        let dup = r#"{"name":"r","children":[{"name":"A"},{"name":"x","children":[{"name":"A"}]}]}"#;
        assert!(matches!(Taxonomy::from_json_str(dup), Err(Error::DuplicateName(n)) if n == "A"));
        assert!(matches!(Taxonomy::from_json_str("  "), Err(Error::EmptyDocument)));
        assert!(matches!(Taxonomy::from_json_str("{}"), Err(Error::EmptyDocument)));
        assert!(matches!(Taxonomy::from_json_str("null"), Err(Error::EmptyDocument)));
        assert!(Taxonomy::from_json_str("[1,2]").is_err());
    }

    #[test]
    fn parent_links_detect_cycles() {
        let links = [("root", None), ("x", Some("y")), ("y", Some("x"))];
        assert!(matches!(Taxonomy::from_parent_links(&links), Err(Error::Cycle(_))));
        let ok = [
            ("root", None),
            ("a", Some("root")),
            ("b", Some("root")),
            ("a1", Some("a")),
        ];
        let t = Taxonomy::from_parent_links(&ok).unwrap();
        let names: Vec<&str> = (0..t.len()).map(|i| t.name(i)).collect();
        assert_eq!(names, ["root", "a", "a1", "b"]);
        let two_roots = [("r1", None), ("r2", None)];
        assert!(Taxonomy::from_parent_links(&two_roots).is_err());
    }

    #[test]
    fn json_round_trip_is_deterministic() {
        let t = small_tree();
        let again = Taxonomy::from_json_str(&t.to_json_string()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn lca_depth_distance_on_t0() {
        let t = small_tree();
        let (a1, a2, b1) = (id(&t, "a1"), id(&t, "a2"), id(&t, "b1"));
        assert_eq!(t.lca(a1, a2).unwrap(), id(&t, "A"));
        assert_eq!(t.lca(a1, b1).unwrap(), t.root());
        assert_eq!(t.lca(a1, a1).unwrap(), a1);
        assert!(matches!(t.lca(a1, 99), Err(Error::InvalidNode(99))));

        assert_eq!(t.depth(id(&t, "A")).unwrap(), 1);
        assert_eq!(t.depth(a1).unwrap(), 2);

        assert_eq!(t.node_distance(a1, id(&t, "A")).unwrap(), 1);
        assert_eq!(t.node_distance(a2, a2).unwrap(), 0);
        assert_eq!(t.node_distance(b1, t.root()).unwrap(), 2);
        assert!(matches!(
            t.node_distance(b1, id(&t, "A")),
            Err(Error::NotAncestor { .. })
        ));
    }

    #[test]
    fn height_and_diameter_examples() {
        assert_eq!(small_tree().height_and_diameter(), (2, 4));
        fn perfect(name: &str, depth: usize) -> TreeSpec {
            if depth == 0 {
                return TreeSpec::leaf(name);
            }
            TreeSpec::node(
                name,
                vec![
                    perfect(&format!("{name}0"), depth - 1),
                    perfect(&format!("{name}1"), depth - 1),
                ],
            )
        }
        let t = Taxonomy::from_spec(&perfect("n", 3)).unwrap();
        assert_eq!(t.height_and_diameter(), (3, 6));
        // single-child chain: leaf pairs only exist below the branching point
        let chain = Taxonomy::from_spec(&TreeSpec::node(
            "r",
            vec![TreeSpec::node("x", vec![TreeSpec::leaf("a"), TreeSpec::leaf("b")])],
        ))
        .unwrap();
        assert_eq!(chain.height_and_diameter(), (2, 2));
    }

    #[test]
    fn levels_on_t0_and_path() {
        let t = small_tree();
        let levels = t.levels_with_multiple_classes();
        assert_eq!(
            levels,
            vec![
                Level {
                    depth: 1,
                    classes: vec![id(&t, "A"), id(&t, "B")]
                },
                Level {
                    depth: 2,
                    classes: vec![id(&t, "a1"), id(&t, "a2"), id(&t, "b1")]
                },
            ]
        );
        let path = Taxonomy::from_spec(&TreeSpec::node(
            "root",
            vec![TreeSpec::node("x", vec![TreeSpec::leaf("y")])],
        ))
        .unwrap();
        assert!(path.levels_with_multiple_classes().is_empty());
    }

    #[test]
    fn three_branching_levels() {
        // root -> {A -> {C -> {c1, c2}}, B -> {b1, b2}}
        let t = Taxonomy::from_spec(&TreeSpec::node(
            "root",
            vec![
                TreeSpec::node(
                    "A",
                    vec![TreeSpec::node("C", vec![TreeSpec::leaf("c1"), TreeSpec::leaf("c2")])],
                ),
                TreeSpec::node("B", vec![TreeSpec::leaf("b1"), TreeSpec::leaf("b2")]),
            ],
        ))
        .unwrap();
        let levels = t.levels_with_multiple_classes();
        assert_eq!(levels.len(), 3);
        let names = |l: &Level| l.classes.iter().map(|&c| t.name(c).to_string()).collect::<Vec<_>>();
        assert_eq!(names(&levels[1]), ["C", "b1", "b2"]);
        assert_eq!(names(&levels[2]), ["c1", "c2", "b1", "b2"]);
    }

    #[test]
    fn shallow_leaves_join_intermediate_levels() {
        // root -> {P -> {R -> {x, y}}, Q}; Q is a leaf at depth 1
        let t = Taxonomy::from_spec(&TreeSpec::node(
            "root",
            vec![
                TreeSpec::node(
                    "P",
                    vec![TreeSpec::node("R", vec![TreeSpec::leaf("x"), TreeSpec::leaf("y")])],
                ),
                TreeSpec::leaf("Q"),
            ],
        ))
        .unwrap();
        let levels = t.levels_with_multiple_classes();
        assert_eq!(levels.iter().map(|l| l.depth).collect::<Vec<_>>(), [1, 2, 3]);
        assert_eq!(levels[1].classes, vec![id(&t, "R"), id(&t, "Q")]);
        assert_eq!(t.target_at_level(id(&t, "Q"), 3).unwrap(), id(&t, "Q"));
    }

    #[test]
    fn targets_on_t0() {
        let t = small_tree();
        let a1 = id(&t, "a1");
        assert_eq!(t.target_at_level(a1, 1).unwrap(), id(&t, "A"));
        assert_eq!(t.target_at_level(a1, 2).unwrap(), a1);
        assert!(matches!(t.target_at_level(a1, 3), Err(Error::NotATargetLevel(3))));
        assert!(matches!(t.target_at_level(a1, 0), Err(Error::NotATargetLevel(0))));
    }
}
