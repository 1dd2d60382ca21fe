//! `key = value` overrides for the fitter grid.
//!
//! Recognized keys: `coeff_min`, `coeff_max`, `coeff_step`, `t_min`,
//! `t_max`, `t_step`, `leaf_fraction`, `background_fraction`, `mode`.

use tealeaf_core::FitConfig;

/// Applies overrides from `text` on top of `base`. Errors carry the line.
pub fn apply_overrides(text: &str, mut base: FitConfig) -> Result<FitConfig, String> {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| format!("line {line}: expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "mode" {
            base.mode = value.parse().map_err(|e| format!("line {line}: {e}"))?;
            continue;
        }
        let v: f64 = value
            .parse()
            .map_err(|_| format!("line {line}: bad number {value:?} for `{key}`"))?;
        let slot = match key {
            "coeff_min" => &mut base.coeff_min,
            "coeff_max" => &mut base.coeff_max,
            "coeff_step" => &mut base.coeff_step,
            "t_min" => &mut base.t_min,
            "t_max" => &mut base.t_max,
            "t_step" => &mut base.t_step,
            "leaf_fraction" => &mut base.leaf_fraction,
            "background_fraction" => &mut base.background_fraction,
            _ => return Err(format!("line {line}: unknown key `{key}`")),
        };
        *slot = v;
    }
    Ok(base)
}
