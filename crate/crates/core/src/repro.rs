//! Named experiments regenerating the data behind the energy plots, the PCA
//! demonstration and the Cantor-product dimension table.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dimension::{cantor_product_dimension, estimate_dimension, Boundary, EstimateOptions};
use crate::energy::s_energy;
use crate::error::{invalid, Error, Result};
use crate::generators::{gen_cantor, gen_cantor_product, gen_lattice, CantorParams};
use crate::geometry::PointFamily;
use crate::pca::{max_off_diagonal, pca_compare};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "energy-cantor-s0.5")]
    EnergyCantorS0_5,
    #[serde(rename = "energy-cantor-s0.1")]
    EnergyCantorS0_1,
    #[serde(rename = "energy-lattice-s2")]
    EnergyLatticeS2,
    #[serde(rename = "energy-lattice-s1.5")]
    EnergyLatticeS1_5,
    #[serde(rename = "pca-grid-vs-garnett")]
    PcaGridVsGarnett,
    #[serde(rename = "dim-table")]
    DimTable,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::EnergyCantorS0_5,
        Self::EnergyCantorS0_1,
        Self::EnergyLatticeS2,
        Self::EnergyLatticeS1_5,
        Self::PcaGridVsGarnett,
        Self::DimTable,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Self::EnergyCantorS0_5 => "energy-cantor-s0.5",
            Self::EnergyCantorS0_1 => "energy-cantor-s0.1",
            Self::EnergyLatticeS2 => "energy-lattice-s2",
            Self::EnergyLatticeS1_5 => "energy-lattice-s1.5",
            Self::PcaGridVsGarnett => "pca-grid-vs-garnett",
            Self::DimTable => "dim-table",
        }
    }

    /// Largest level (Cantor experiments, dimension table) or lattice index `k`
    /// (lattice experiments) used when none is given.
    pub fn default_max_level(self) -> u32 {
        match self {
            Self::EnergyCantorS0_5 | Self::EnergyCantorS0_1 => 15,
            Self::EnergyLatticeS2 | Self::EnergyLatticeS1_5 => 110,
            Self::PcaGridVsGarnett => 5,
            Self::DimTable => 7,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        // "energy-lattice" is shorthand for the s = 2 series
        let s = if s == "energy-lattice" { "energy-lattice-s2" } else { s };
        Self::ALL.into_iter().find(|e| e.id() == s).ok_or_else(|| {
            let ids: Vec<&str> = Self::ALL.iter().map(|e| e.id()).collect();
            invalid(format!("unknown experiment {s:?}; expected one of {}", ids.join(", ")))
        })
    }
}

/// One plotted value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

/// A qualitative claim checked on the regenerated data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub experiment: Experiment,
    pub max_level: u32,
    pub rows: Vec<SeriesRow>,
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
}

impl ReproReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run(experiment: Experiment, max_level: Option<u32>) -> Result<ReproReport> {
    let max_level = max_level.unwrap_or(experiment.default_max_level());
    let (rows, checks, details) = match experiment {
        Experiment::EnergyCantorS0_5 => cantor_series(0.5, max_level)?,
        Experiment::EnergyCantorS0_1 => cantor_series(0.1, max_level)?,
        Experiment::EnergyLatticeS2 => lattice_series(2.0, max_level)?,
        Experiment::EnergyLatticeS1_5 => lattice_series(1.5, max_level)?,
        Experiment::PcaGridVsGarnett => pca_grid_vs_garnett(max_level)?,
        Experiment::DimTable => dim_table(max_level)?,
    };
    Ok(ReproReport {
        experiment,
        max_level,
        rows,
        checks,
        details,
    })
}

type Parts = (Vec<SeriesRow>, Vec<Check>, serde_json::Value);

fn increments(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

fn nondecreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] >= w[0])
}

/// `I_s(C_{2,4}^k)` for `k = 1..=max_level`.
fn cantor_series(s: f64, max_level: u32) -> Result<Parts> {
    if max_level < 3 {
        return Err(invalid("the Cantor series needs max level >= 3"));
    }
    let label = format!("I_{s}(C_2,4^k)");
    let mut sizes = Vec::new();
    let mut values = Vec::new();
    for k in 1..=max_level {
        let ps = gen_cantor(&CantorParams::new(2, 4, k))?;
        sizes.push(ps.len());
        values.push(s_energy(&ps, s)?.value);
    }
    let rows = values
        .iter()
        .zip(1..)
        .map(|(&y, k)| SeriesRow {
            x: f64::from(k),
            y,
            series: label.clone(),
        })
        .collect();
    let inc = increments(&values);
    let mut checks = vec![Check::new(
        "nondecreasing",
        nondecreasing(&values),
        format!("I_s over levels 1..={max_level}"),
    )];
    let tail = inc[inc.len() - 1] / inc[1];
    if s < 0.5 {
        // bounded: increments shrink geometrically
        checks.push(Check::new(
            "converges",
            tail < 0.1,
            format!("last increment / second increment = {tail:.3e}"),
        ));
    } else {
        // logarithmic growth at the critical exponent: increments level off
        // rather than growing
        let late = inc[inc.len() - 1] / inc[inc.len() - 2];
        checks.push(Check::new(
            "slow growth",
            late < 1.1,
            format!("ratio of the last two increments = {late:.4}"),
        ));
    }
    let details = json!({ "s": s, "levels": (1..=max_level).collect::<Vec<_>>(), "n": sizes, "energy": values, "increments": inc });
    Ok((rows, checks, details))
}

/// `I_s` of the `(k+1) x (k+1)` lattice for `k = 1..=max_k`.
fn lattice_series(s: f64, max_k: u32) -> Result<Parts> {
    if max_k < 4 {
        return Err(invalid("the lattice series needs max k >= 4"));
    }
    let label = format!("I_{s}(lattice)");
    let mut values = Vec::new();
    for k in 1..=max_k as usize {
        values.push(s_energy(&gen_lattice(2, k + 1)?, s)?.value);
    }
    let rows = values
        .iter()
        .zip(1..)
        .map(|(&y, k)| SeriesRow {
            x: f64::from(k),
            y,
            series: label.clone(),
        })
        .collect();
    let half = values.len() / 2;
    let n = |k: usize| ((k + 1) * (k + 1)) as f64;
    let (k0, k1) = (half, values.len());
    let late_slope = (values[k1 - 1] / values[k0 - 1]).ln() / (n(k1) / n(k0)).ln();
    let checks = vec![
        Check::new("nondecreasing", nondecreasing(&values), format!("k = 1..={max_k}")),
        Check::new(
            "slow growth",
            late_slope < 0.25,
            format!("log-log slope of I_s against n over k = {k0}..={k1}: {late_slope:.4}"),
        ),
    ];
    let details = json!({ "s": s, "k": (1..=max_k).collect::<Vec<_>>(), "energy": values, "late_slope": late_slope });
    Ok((rows, checks, details))
}

/// PCA of the 33 x 33 grid against the Garnett set `C_{2,4}^k x C_{2,4}^k`,
/// plus dimension estimates of the two families they end.
fn pca_grid_vs_garnett(level: u32) -> Result<Parts> {
    if level < 3 {
        return Err(invalid("the PCA comparison needs Garnett level >= 3"));
    }
    let grid = gen_lattice(2, 33)?;
    let factor = CantorParams::new(2, 4, level);
    let garnett = gen_cantor_product(&[factor.clone(), factor])?;
    let cmp = pca_compare(&grid, &garnett)?;
    let off = (max_off_diagonal(&cmp.a.covariance), max_off_diagonal(&cmp.b.covariance));

    let grid_family = PointFamily::new(
        "grid",
        [5, 9, 17, 33]
            .iter()
            .map(|&q| gen_lattice(2, q))
            .collect::<Result<_>>()?,
    )?;
    let garnett_family = PointFamily::new(
        "garnett",
        (level.saturating_sub(3).max(1)..=level)
            .map(|k| gen_cantor_product(&[CantorParams::new(2, 4, k), CantorParams::new(2, 4, k)]))
            .collect::<Result<_>>()?,
    )?;
    let opts = EstimateOptions::default();
    let est_grid = estimate_dimension(&grid_family, &opts)?;
    let est_garnett = estimate_dimension(&garnett_family, &opts)?;

    let mut rows = Vec::new();
    for (label, r) in [("grid", &cmp.a), ("garnett", &cmp.b)] {
        for (i, v) in r.explained_variance_ratio.iter().enumerate() {
            rows.push(SeriesRow {
                x: (i + 1) as f64,
                y: *v,
                series: format!("explained variance ratio, {label}"),
            });
        }
    }
    let checks = vec![
        Check::new(
            "explained variance equal",
            cmp.max_explained_discrepancy <= 1e-6,
            format!("max difference {:.3e}", cmp.max_explained_discrepancy),
        ),
        Check::new(
            "covariances diagonal",
            off.0 <= 1e-10 && off.1 <= 1e-10,
            format!("largest off-diagonal entries {:.3e}, {:.3e}", off.0, off.1),
        ),
        Check::new(
            "dimension separates",
            est_grid.value - est_garnett.value >= 0.5,
            format!("grid {:.4}, garnett {:.4}", est_grid.value, est_garnett.value),
        ),
    ];
    let details = json!({
        "grid_q": 33,
        "garnett_level": level,
        "pca": cmp,
        "dimension": {
            "grid": { "value": est_grid.value, "boundary": est_grid.boundary, "n": est_grid.n_values },
            "garnett": { "value": est_garnett.value, "boundary": est_garnett.boundary, "n": est_garnett.n_values },
        },
    });
    Ok((rows, checks, details))
}

/// A Cantor-product family with its closed-form dimension.
pub struct CantorFamilySpec {
    pub label: &'static str,
    pub factors: &'static [(usize, usize)],
    pub levels: std::ops::RangeInclusive<u32>,
}

pub fn cantor_table_families() -> [CantorFamilySpec; 3] {
    [
        CantorFamilySpec {
            label: "C_2,4 x C_2,4",
            factors: &[(2, 4), (2, 4)],
            levels: 3..=7,
        },
        CantorFamilySpec {
            label: "C_2,3 x C_2,3",
            factors: &[(2, 3), (2, 3)],
            levels: 3..=7,
        },
        CantorFamilySpec {
            label: "C_2,4 x C_2,3 x C_2,3",
            factors: &[(2, 4), (2, 3), (2, 3)],
            levels: 2..=5,
        },
    ]
}

impl CantorFamilySpec {
    pub fn family(&self, max_level: u32) -> Result<PointFamily> {
        let (lo, hi) = (*self.levels.start(), (*self.levels.end()).min(max_level));
        let members = (lo..=hi)
            .map(|k| {
                let factors: Vec<CantorParams> =
                    self.factors.iter().map(|&(m, n)| CantorParams::new(m, n, k)).collect();
                gen_cantor_product(&factors)
            })
            .collect::<Result<_>>()?;
        PointFamily::new(self.label, members)
    }
}

fn dim_table(max_level: u32) -> Result<Parts> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut table = Vec::new();
    for spec in cantor_table_families() {
        let family = spec.family(max_level)?;
        let formula = cantor_product_dimension(spec.factors)?;
        let est = estimate_dimension(&family, &EstimateOptions::default())?;
        rows.push(SeriesRow {
            x: formula,
            y: est.value,
            series: spec.label.to_string(),
        });
        checks.push(Check::new(
            spec.label,
            (est.value - formula).abs() <= 0.15 && est.boundary == Boundary::Interior,
            format!("estimate {:.4}, formula {formula:.4}", est.value),
        ));
        table.push(json!({ "family": spec.label, "n": est.n_values, "formula": formula, "estimate": est.value, "boundary": est.boundary }));
    }
    Ok((rows, checks, json!({ "table": table })))
}
