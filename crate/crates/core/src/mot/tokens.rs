use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Source of a token in the fused sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Target,
    Reference,
    Text,
}

/// `n_tokens x d_model` features with one modality tag per row.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    tokens: Matrix,
    tags: Vec<Modality>,
}

impl TokenSequence {
    pub fn new(tokens: Matrix, tags: Vec<Modality>) -> Result<Self> {
        if tags.len() != tokens.rows() {
            return Err(Error::dim(format!(
                "{} tags for {} tokens",
                tags.len(),
                tokens.rows()
            )));
        }
        Ok(Self { tokens, tags })
    }

    /// Every token carries the same tag.
    pub fn uniform(tokens: Matrix, tag: Modality) -> Self {
        let tags = vec![tag; tokens.rows()];
        Self { tokens, tags }
    }

    pub fn tokens(&self) -> &Matrix {
        &self.tokens
    }

    pub fn tags(&self) -> &[Modality] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn d_model(&self) -> usize {
        self.tokens.cols()
    }

    /// Appends `other` after `self`.
    pub fn concat(&self, other: &TokenSequence) -> Result<TokenSequence> {
        if self.d_model() != other.d_model() {
            return Err(Error::dim(format!(
                "d_model {} vs {}",
                self.d_model(),
                other.d_model()
            )));
        }
        let tokens = Matrix::vstack(&[&self.tokens, &other.tokens])?;
        let mut tags = self.tags.clone();
        tags.extend_from_slice(&other.tags);
        Ok(Self { tokens, tags })
    }

    pub(crate) fn with_tokens(&self, tokens: Matrix) -> TokenSequence {
        debug_assert_eq!(tokens.rows(), self.tags.len());
        Self {
            tokens,
            tags: self.tags.clone(),
        }
    }
}

/// Concatenates target, reference and (optional) text tokens in that order.
pub fn fuse(
    target: &TokenSequence,
    reference: &TokenSequence,
    text: Option<&TokenSequence>,
) -> Result<TokenSequence> {
    let fused = target.concat(reference)?;
    match text {
        Some(p) => fused.concat(p),
        None => Ok(fused),
    }
}
