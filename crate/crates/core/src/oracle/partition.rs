//! Exact bisimilarity for unindexed types by partition refinement.

use std::collections::HashMap;

use crate::ast::{unfold, Label, SessionType, Signature};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Plus(Vec<Label>),
    With(Vec<Label>),
    Tensor,
    Lolli,
    One,
}

struct Lts {
    kinds: Vec<Kind>,
    /// Successors in a fixed order: sorted labels, or `[fst, snd]`.
    succ: Vec<Vec<usize>>,
    ids: HashMap<SessionType, usize>,
}

impl Lts {
    /// Interns the constructor reached from `t`. `None` when the type has
    /// indices, refinements or quantifiers, or an undefined name.
    fn state(&mut self, sig: &Signature, t: &SessionType) -> Option<usize> {
        let mut t = t.clone();
        let mut fuel = sig.len() + 1;
        while let SessionType::Var(_, args) = &t {
            if !args.is_empty() || fuel == 0 {
                return None;
            }
            fuel -= 1;
            t = unfold(sig, &t).ok()?;
        }
        if let Some(&i) = self.ids.get(&t) {
            return Some(i);
        }
        let id = self.kinds.len();
        self.ids.insert(t.clone(), id);
        self.kinds.push(Kind::One);
        self.succ.push(Vec::new());
        let (kind, kids): (Kind, Vec<&SessionType>) = match &t {
            SessionType::Plus(bs) | SessionType::With(bs) => {
                let mut sorted: Vec<&(Label, SessionType)> = bs.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                let labels = sorted.iter().map(|(l, _)| l.clone()).collect();
                let kind = if matches!(t, SessionType::Plus(_)) {
                    Kind::Plus(labels)
                } else {
                    Kind::With(labels)
                };
                (kind, sorted.iter().map(|(_, a)| a).collect())
            }
            SessionType::Tensor(a, b) => (Kind::Tensor, vec![&**a, &**b]),
            SessionType::Lolli(a, b) => (Kind::Lolli, vec![&**a, &**b]),
            SessionType::One => (Kind::One, Vec::new()),
            _ => return None,
        };
        let mut succ = Vec::with_capacity(kids.len());
        for k in kids {
            succ.push(self.state(sig, k)?);
        }
        self.kinds[id] = kind;
        self.succ[id] = succ;
        Some(id)
    }
}

/// Whether two closed unindexed types are bisimilar. `None` when either
/// mentions arithmetic.
pub fn exact_bisimilar(sig: &Signature, a: &SessionType, b: &SessionType) -> Option<bool> {
    let mut lts = Lts {
        kinds: Vec::new(),
        succ: Vec::new(),
        ids: HashMap::new(),
    };
    let ia = lts.state(sig, a)?;
    let ib = lts.state(sig, b)?;

    // initial blocks by observation, then split by successor blocks
    let mut block: Vec<usize> = {
        let mut index: HashMap<&Kind, usize> = HashMap::new();
        lts.kinds
            .iter()
            .map(|k| {
                let n = index.len();
                *index.entry(k).or_insert(n)
            })
            .collect()
    };
    loop {
        let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let next: Vec<usize> = (0..block.len())
            .map(|s| {
                let key = (block[s], lts.succ[s].iter().map(|&t| block[t]).collect());
                let n = index.len();
                *index.entry(key).or_insert(n)
            })
            .collect();
        let stable = index.len() == block.iter().collect::<std::collections::HashSet<_>>().len();
        block = next;
        if stable {
            break;
        }
    }
    Some(block[ia] == block[ib])
}
