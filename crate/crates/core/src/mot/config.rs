use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::AgrFallback;

/// Model configuration, read from JSON. Unknown keys are ignored so one
/// document can also carry command-line settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MotConfig {
    pub d_model: usize,
    pub n_heads: usize,
    pub n_experts: usize,
    pub lora_rank: usize,
    pub gate_hidden: usize,
    pub seed: u64,
    pub agr_fallback: AgrFallback,
}

impl Default for MotConfig {
    fn default() -> Self {
        Self {
            d_model: 32,
            n_heads: 4,
            n_experts: 8,
            lora_rank: 4,
            gate_hidden: 32,
            seed: 0,
            agr_fallback: AgrFallback::Assistant,
        }
    }
}

impl MotConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: MotConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.d_model == 0 || self.n_heads == 0 {
            return fail("d_model and n_heads must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return fail(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.n_experts < 2 {
            return fail("need a backbone expert and at least one assistant".into());
        }
        if self.lora_rank == 0 || self.gate_hidden == 0 {
            return fail("lora_rank and gate_hidden must be positive".into());
        }
        Ok(())
    }

    /// FFN hidden width.
    pub fn ffn_hidden(&self) -> usize {
        4 * self.d_model
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let cfg = MotConfig::from_json(
            r#"{"d_model": 64, "n_heads": 4, "n_experts": 8, "lora_rank": 32, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.gate_hidden, 32);
        assert_eq!(cfg.lora_rank, 32);
        assert_eq!(cfg.agr_fallback, AgrFallback::Assistant);
    }

    #[test]
    fn fallback_flag() {
        let cfg = MotConfig::from_json(r#"{"agr_fallback": "top_weight"}"#).unwrap();
        assert_eq!(cfg.agr_fallback, AgrFallback::TopWeight);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(MotConfig::from_json(r#"{"d_model": 30, "n_heads": 4}"#).is_err());
        assert!(MotConfig::from_json(r#"{"n_experts": 1}"#).is_err());
        assert!(MotConfig::from_json(r#"{"d_model": "big"}"#).is_err());
        assert!(MotConfig::from_json("not json").is_err());
    }
}
