// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::sync::Arc;

use super::ExplicitPrior;
use crate::error::{Error, Result};

type Predicate = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// A statement about a dataset.
///
/// `Tag` secrets are evaluated against the tag lists carried by likelihood
/// matrices; the other variants look at dataset values.
#[derive(Clone)]
pub enum Secret {
    EntryEquals { index: usize, value: usize },
    Tag(String),
    Custom { name: String, test: Predicate },
}

impl Secret {
    pub fn custom(name: impl Into<String>, test: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        Secret::Custom { name: name.into(), test: Arc::new(test) }
    }

    pub fn holds(&self, dataset: &[usize]) -> bool {
        match self {
            Secret::EntryEquals { index, value } => dataset.get(*index) == Some(value),
            Secret::Tag(_) => false,
            Secret::Custom { test, .. } => test(dataset),
        }
    }

    pub fn holds_for_tags(&self, tags: &[String]) -> bool {
        match self {
            Secret::Tag(t) => tags.iter().any(|x| x == t),
            _ => false,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Secret::EntryEquals { index, value } => format!("x{index}={value}"),
            Secret::Tag(t) => t.clone(),
            Secret::Custom { name, .. } => name.clone(),
        }
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Secret({})", self.name())
    }
}

/// Two mutually exclusive secrets that should stay indistinguishable.
#[derive(Clone, Debug)]
pub struct SecretPair {
    pub left: Secret,
    pub right: Secret,
    pub label: String,
}

impl SecretPair {
    pub fn new(left: Secret, right: Secret) -> Self {
        let label = format!("{} vs {}", left.name(), right.name());
        SecretPair { left, right, label }
    }

    /// Entry `index` takes `a` versus `b`.
    pub fn entry(index: usize, a: usize, b: usize) -> Self {
        SecretPair::new(
            Secret::EntryEquals { index, value: a },
            Secret::EntryEquals { index, value: b },
        )
    }

    pub fn tagged(left: impl Into<String>, right: impl Into<String>) -> Self {
        SecretPair::new(Secret::Tag(left.into()), Secret::Tag(right.into()))
    }

    pub fn reversed(&self) -> Self {
        SecretPair {
            left: self.right.clone(),
            right: self.left.clone(),
            label: format!("{} vs {}", self.right.name(), self.left.name()),
        }
    }

    /// Checks mutual exclusivity and positive mass for both sides.
    pub fn validate_on(&self, prior: &ExplicitPrior) -> Result<(f64, f64)> {
        let mut left = 0.0;
        let mut right = 0.0;
        for (d, p) in prior.iter() {
            let (l, r) = (self.left.holds(d), self.right.holds(d));
            if l && r && p > 0.0 {
                return Err(Error::validation(format!(
                    "dataset {d:?} satisfies both sides of {}",
                    self.label
                )));
            }
            if l {
                left += p;
            }
            if r {
                right += p;
            }
        }
        if !(left > 0.0 && right > 0.0) {
            return Err(Error::validation(format!(
                "secret with zero prior probability in {} ({left}, {right})",
                self.label
            )));
        }
        Ok((left, right))
    }
}
