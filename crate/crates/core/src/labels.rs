use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

/// Cluster membership of a single point. Serialized as an integer, `-1`
/// for noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "i64", into = "i64")]
pub enum Label {
    Noise,
    Cluster(u32),
}

pub const NOISE: Label = Label::Noise;

impl Label {
    pub fn is_noise(self) -> bool {
        matches!(self, Label::Noise)
    }

    pub fn cluster(self) -> Option<u32> {
        match self {
            Label::Noise => None,
            Label::Cluster(c) => Some(c),
        }
    }
}

impl From<i64> for Label {
    fn from(raw: i64) -> Self {
        if raw < 0 {
            Label::Noise
        } else {
            Label::Cluster(raw as u32)
        }
    }
}

impl From<Label> for i64 {
    fn from(l: Label) -> Self {
        match l {
            Label::Noise => -1,
            Label::Cluster(c) => c as i64,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", i64::from(*self))
    }
}

/// One label per point id.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Labeling(Vec<Label>);

impl Labeling {
    pub fn new(labels: Vec<Label>) -> Self {
        Self(labels)
    }

    pub fn all_noise(n: usize) -> Self {
        Self(vec![Label::Noise; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Label> {
        self.0
    }

    pub fn get(&self, id: usize) -> Label {
        self.0[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = Label> + '_ {
        self.0.iter().copied()
    }

    pub fn num_clusters(&self) -> usize {
        let mut seen: Vec<u32> = self.0.iter().filter_map(|l| l.cluster()).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    pub fn noise_count(&self) -> usize {
        self.0.iter().filter(|l| l.is_noise()).count()
    }

    /// Renumber clusters to `0..h` in order of first appearance.
    pub fn canonical(&self) -> Labeling {
        let mut remap = HashMap::new();
        let labels = self
            .0
            .iter()
            .map(|l| match l {
                Label::Noise => Label::Noise,
                Label::Cluster(c) => {
                    let next = remap.len() as u32;
                    Label::Cluster(*remap.entry(*c).or_insert(next))
                }
            })
            .collect();
        Labeling(labels)
    }

    /// `id,label` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,label")?;
        for (id, l) in self.0.iter().enumerate() {
            writeln!(w, "{id},{l}")?;
        }
        Ok(())
    }
}

impl FromIterator<Label> for Labeling {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl std::ops::Index<usize> for Labeling {
    type Output = Label;

    fn index(&self, id: usize) -> &Label {
        &self.0[id]
    }
}
