//! Feature models for software product lines.
//!
//! Text format, one statement per line, `#` starts a comment:
//!
//! ```text
//! root <Name>
//! mandatory <Parent> <Child>
//! optional <Parent> <Child>
//! alt <Parent> <Child1> <Child2> ...
//! or <Parent> <Child1> <Child2> ...
//! requires <A> <B>
//! excludes <A> <B>
//! ```
//!
//! Features are declared by appearing as the root or as a child. Statements
//! may come in any order.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelErrorKind {
    #[error("no root")]
    NoRoot,
    #[error("multiple roots (`{0}` and `{1}`)")]
    MultipleRoots(String, String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("cyclic edges through `{0}`")]
    Cycle(String),
    #[error("feature `{0}` already has a parent")]
    DuplicateParent(String),
    #[error("`{0}` group needs at least two children")]
    GroupArity(String),
    #[error("syntax: {0}")]
    Syntax(String),
}

/// A feature-model error with its 1-based source line, when it has one.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ModelError {
    pub line: Option<usize>,
    pub kind: ModelErrorKind,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "feature model line {l}: {}", self.kind),
            None => write!(f, "feature model: {}", self.kind),
        }
    }
}

fn err(line: Option<usize>, kind: ModelErrorKind) -> Error {
    Error::FeatureModel(ModelError { line, kind })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    Mandatory,
    Optional,
    Alternative,
    Or,
}

impl GroupKind {
    fn keyword(self) -> &'static str {
        match self {
            GroupKind::Mandatory => "mandatory",
            GroupKind::Optional => "optional",
            GroupKind::Alternative => "alt",
            GroupKind::Or => "or",
        }
    }
}

/// Parent-to-children relation. Mandatory and optional carry one child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub kind: GroupKind,
    pub parent: usize,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossTree {
    Requires(usize, usize),
    Excludes(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureModel {
    names: Vec<String>,
    root: usize,
    parent: Vec<Option<usize>>,
    relations: Vec<Relation>,
    constraints: Vec<CrossTree>,
}

/// A product: one selection bit per feature, in model order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Product {
    pub selection: Vec<bool>,
}

impl Product {
    pub fn new(selection: Vec<bool>) -> Self {
        Self { selection }
    }

    /// Selects exactly the named features.
    pub fn from_names(model: &FeatureModel, names: &[&str]) -> Result<Self> {
        let mut selection = vec![false; model.len()];
        for n in names {
            let i = model
                .index_of(n)
                .ok_or_else(|| err(None, ModelErrorKind::UnknownFeature(n.to_string())))?;
            selection[i] = true;
        }
        Ok(Self { selection })
    }

    pub fn count_selected(&self) -> usize {
        self.selection.iter().filter(|&&b| b).count()
    }
}

impl FeatureModel {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, feature: usize) -> Option<usize> {
        self.parent[feature]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn constraints(&self) -> &[CrossTree] {
        &self.constraints
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Serializes back into the text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("root {}\n", self.names[self.root]);
        for r in &self.relations {
            out.push_str(r.kind.keyword());
            out.push(' ');
            out.push_str(&self.names[r.parent]);
            for &c in &r.children {
                out.push(' ');
                out.push_str(&self.names[c]);
            }
            out.push('\n');
        }
        for c in &self.constraints {
            let (kw, a, b) = match *c {
                CrossTree::Requires(a, b) => ("requires", a, b),
                CrossTree::Excludes(a, b) => ("excludes", a, b),
            };
            out.push_str(&format!("{kw} {} {}\n", self.names[a], self.names[b]));
        }
        out
    }
}

enum Stmt<'a> {
    Root(&'a str),
    Tree(GroupKind, &'a str, Vec<&'a str>),
    Cross(bool, &'a str, &'a str),
}

pub fn parse_feature_model(text: &str) -> Result<FeatureModel> {
    let mut stmts: Vec<(usize, Stmt)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let syntax = |msg: String| err(Some(line), ModelErrorKind::Syntax(msg));
        let stmt = match toks[0] {
            "root" => {
                if toks.len() != 2 {
                    return Err(syntax("`root` takes one feature".into()));
                }
                Stmt::Root(toks[1])
            }
            kw @ ("mandatory" | "optional") => {
                if toks.len() != 3 {
                    return Err(syntax(format!("`{kw}` takes a parent and one child")));
                }
                let kind = if kw == "mandatory" {
                    GroupKind::Mandatory
                } else {
                    GroupKind::Optional
                };
                Stmt::Tree(kind, toks[1], vec![toks[2]])
            }
            kw @ ("alt" | "or") => {
                if toks.len() < 2 {
                    return Err(syntax(format!("`{kw}` needs a parent")));
                }
                if toks.len() < 4 {
                    return Err(err(Some(line), ModelErrorKind::GroupArity(kw.to_string())));
                }
                let kind = if kw == "alt" {
                    GroupKind::Alternative
                } else {
                    GroupKind::Or
                };
                Stmt::Tree(kind, toks[1], toks[2..].to_vec())
            }
            kw @ ("requires" | "excludes") => {
                if toks.len() != 3 {
                    return Err(syntax(format!("`{kw}` takes two features")));
                }
                Stmt::Cross(kw == "requires", toks[1], toks[2])
            }
            other => return Err(syntax(format!("unknown statement `{other}`"))),
        };
        stmts.push((line, stmt));
    }

    // declarations: root, then children in order of appearance
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut root: Option<(usize, &str)> = None;
    for (line, s) in &stmts {
        if let Stmt::Root(r) = s {
            if let Some((_, prev)) = root {
                return Err(err(
                    Some(*line),
                    ModelErrorKind::MultipleRoots(prev.to_string(), r.to_string()),
                ));
            }
            root = Some((*line, r));
        }
    }
    let (_, root_name) = root.ok_or_else(|| err(None, ModelErrorKind::NoRoot))?;
    names.push(root_name.to_string());
    index.insert(root_name, 0);

    let mut parent: Vec<Option<usize>> = vec![None];
    let mut child_lines: Vec<(usize, &str)> = Vec::new();
    for (line, s) in &stmts {
        if let Stmt::Tree(_, _, children) = s {
            for c in children {
                if *c == root_name {
                    return Err(err(Some(*line), ModelErrorKind::Cycle(c.to_string())));
                }
                if index.contains_key(c) {
                    return Err(err(
                        Some(*line),
                        ModelErrorKind::DuplicateParent(c.to_string()),
                    ));
                }
                index.insert(c, names.len());
                names.push(c.to_string());
                parent.push(None);
                child_lines.push((*line, c));
            }
        }
    }

    let lookup = |line: usize, name: &str| -> Result<usize> {
        index
            .get(name)
            .copied()
            .ok_or_else(|| err(Some(line), ModelErrorKind::UnknownFeature(name.to_string())))
    };
    let mut relations = Vec::new();
    let mut constraints = Vec::new();
    for (line, s) in &stmts {
        match s {
            Stmt::Root(_) => {}
            Stmt::Tree(kind, p, children) => {
                let p = lookup(*line, p)?;
                let children: Vec<usize> = children.iter().map(|c| index[c]).collect();
                for &c in &children {
                    if c == p {
                        return Err(err(Some(*line), ModelErrorKind::Cycle(names[c].clone())));
                    }
                    parent[c] = Some(p);
                }
                relations.push(Relation {
                    kind: *kind,
                    parent: p,
                    children,
                });
            }
            Stmt::Cross(req, a, b) => {
                let (a, b) = (lookup(*line, a)?, lookup(*line, b)?);
                constraints.push(if *req {
                    CrossTree::Requires(a, b)
                } else {
                    CrossTree::Excludes(a, b)
                });
            }
        }
    }

    // every feature must reach the root; otherwise its parent chain loops
    for (line, c) in &child_lines {
        let mut cur = index[c];
        let mut steps = 0;
        while let Some(p) = parent[cur] {
            cur = p;
            steps += 1;
            if steps > names.len() {
                return Err(err(Some(*line), ModelErrorKind::Cycle(c.to_string())));
            }
        }
        if cur != 0 {
            return Err(err(Some(*line), ModelErrorKind::Cycle(c.to_string())));
        }
    }

    Ok(FeatureModel {
        names,
        root: 0,
        parent,
        relations,
        constraints,
    })
}

/// Number of violated rules. Zero iff the product is valid.
///
/// Rules: the root is selected; a mandatory child matches its selected parent;
/// no child is selected without its parent; an alternative group under a
/// selected parent has exactly one selected child; an or-group under a
/// selected parent has at least one; every `requires` and `excludes` holds.
pub fn count_violations(model: &FeatureModel, product: &Product) -> Result<usize> {
    let sel = &product.selection;
    if sel.len() != model.len() {
        return Err(Error::ArityMismatch {
            expected: model.len(),
            found: sel.len(),
        });
    }
    let mut v = usize::from(!sel[model.root]);
    for (f, p) in model.parent.iter().enumerate() {
        if let Some(p) = *p {
            if sel[f] && !sel[p] {
                v += 1;
            }
        }
    }
    for r in &model.relations {
        if !sel[r.parent] {
            continue;
        }
        let on = r.children.iter().filter(|&&c| sel[c]).count();
        v += usize::from(match r.kind {
            GroupKind::Mandatory => on != 1,
            GroupKind::Optional => false,
            GroupKind::Alternative => on != 1,
            GroupKind::Or => on == 0,
        });
    }
    for c in &model.constraints {
        v += usize::from(match *c {
            CrossTree::Requires(a, b) => sel[a] && !sel[b],
            CrossTree::Excludes(a, b) => sel[a] && sel[b],
        });
    }
    Ok(v)
}

/// The mobile-phone product line: ten features, `Calls` and `Screen`
/// mandatory, `GPS` and `Media` optional, `Screen` an alternative of three
/// displays, `Media` an or-group of camera and MP3. The two cross-tree
/// constraints are illustrative additions, not part of the original figure.
pub const MOBILE_PHONE: &str = include_str!("../../data/mobile_phone.fm");
