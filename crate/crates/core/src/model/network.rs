use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ContactMatrix;
use crate::{Error, Result};

/// Thresholds and recovery of one disease.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiseaseProfile {
    pub pathogenic_threshold: f64,
    pub lethal_threshold: f64,
    /// Fraction of exposure an individual retains each round.
    pub recover_coefficient: f64,
}

impl DiseaseProfile {
    pub const MALIGNANT: Self = Self::new(0.4, 4.0, 0.9);
    pub const MODERATE: Self = Self::new(0.7, 6.0, 0.7);
    pub const GENERAL: Self = Self::new(0.9, 8.0, 0.5);

    pub const fn new(pathogenic: f64, lethal: f64, recover: f64) -> Self {
        Self {
            pathogenic_threshold: pathogenic,
            lethal_threshold: lethal,
            recover_coefficient: recover,
        }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.pathogenic_threshold > 0.0 && self.pathogenic_threshold.is_finite()) {
            return Err(Error::parameter(
                format!("{prefix}pathogenic_threshold"),
                "must be positive",
            ));
        }
        if !(self.lethal_threshold > self.pathogenic_threshold && self.lethal_threshold.is_finite())
        {
            return Err(Error::parameter(
                format!("{prefix}lethal_threshold"),
                "must exceed the pathogenic threshold",
            ));
        }
        if !(0.0..=1.0).contains(&self.recover_coefficient) {
            return Err(Error::parameter(
                format!("{prefix}recover_coefficient"),
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

impl Default for DiseaseProfile {
    fn default() -> Self {
        Self::MODERATE
    }
}

/// How the spread parameters of [`NetworkSpec`] are read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadKind {
    #[default]
    StdDev,
    Variance,
}

impl SpreadKind {
    fn to_std_dev(self, spread: f64) -> f64 {
        match self {
            SpreadKind::StdDev => spread,
            SpreadKind::Variance => spread.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommunitySpec {
    pub community_size: usize,
    /// Edges placed between every unordered pair of communities.
    pub inter_community_links: usize,
}

impl Default for CommunitySpec {
    fn default() -> Self {
        Self {
            community_size: 100,
            inter_community_links: 1,
        }
    }
}

/// Parameters of a random contact network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSpec {
    pub population: usize,
    pub contact_count_mean: f64,
    /// `None` means variance equal to the mean.
    pub contact_count_spread: Option<f64>,
    pub exposure_coeff_mean: f64,
    /// `None` means a standard deviation of half the mean.
    pub exposure_coeff_spread: Option<f64>,
    pub spread_kind: SpreadKind,
    pub community: Option<CommunitySpec>,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        Self {
            population: 100,
            contact_count_mean: 4.0,
            contact_count_spread: None,
            exposure_coeff_mean: 0.13,
            exposure_coeff_spread: None,
            spread_kind: SpreadKind::StdDev,
            community: None,
        }
    }
}

impl NetworkSpec {
    pub fn contact_count_std_dev(&self) -> f64 {
        match self.contact_count_spread {
            None => self.contact_count_mean.sqrt(),
            Some(s) => self.spread_kind.to_std_dev(s),
        }
    }

    pub fn exposure_coeff_std_dev(&self) -> f64 {
        match self.exposure_coeff_spread {
            None => self.exposure_coeff_mean / 2.0,
            Some(s) => self.spread_kind.to_std_dev(s),
        }
    }

    /// Individuals who can be contacted by any one individual.
    fn contact_pool(&self) -> usize {
        match self.community {
            Some(c) => c.community_size,
            None => self.population,
        }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}{name}");
        if self.population == 0 {
            return Err(Error::parameter(field("population"), "must be at least 1"));
        }
        let finite_non_negative = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_non_negative(self.contact_count_mean) {
            return Err(Error::parameter(
                field("contact_count_mean"),
                "must be finite and non-negative",
            ));
        }
        if !finite_non_negative(self.exposure_coeff_mean) {
            return Err(Error::parameter(
                field("exposure_coeff_mean"),
                "must be finite and non-negative",
            ));
        }
        for (name, spread) in [
            ("contact_count_spread", self.contact_count_spread),
            ("exposure_coeff_spread", self.exposure_coeff_spread),
        ] {
            if let Some(s) = spread {
                if !finite_non_negative(s) {
                    return Err(Error::parameter(
                        field(name),
                        "must be finite and non-negative",
                    ));
                }
            }
        }
        if let Some(c) = &self.community {
            if c.community_size == 0 {
                return Err(Error::parameter(
                    field("community.community_size"),
                    "must be at least 1",
                ));
            }
            if c.community_size > self.population {
                return Err(Error::parameter(
                    field("community.community_size"),
                    "exceeds the population",
                ));
            }
            if !self.population.is_multiple_of(c.community_size) {
                return Err(Error::parameter(
                    field("community.community_size"),
                    "population must be a multiple of the community size",
                ));
            }
            let pairs = c.community_size * c.community_size;
            if self.population > c.community_size && c.inter_community_links > pairs {
                return Err(Error::parameter(
                    field("community.inter_community_links"),
                    format!("at most {pairs} distinct links fit between two communities"),
                ));
            }
        }
        if self.contact_count_mean > (self.contact_pool() - 1) as f64 {
            return Err(Error::parameter(
                field("contact_count_mean"),
                "exceeds the number of possible contacts",
            ));
        }
        Ok(())
    }
}

/// Draws one target contact count: a rounded normal draw, redrawn until
/// non-negative, clamped to `max`.
fn sample_contact_count<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64, max: usize) -> usize {
    let count = loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = (mean + sd * z).round();
        if v >= 0.0 {
            break v;
        }
    };
    (count as usize).min(max)
}

/// Draws one exposure coefficient from the normal distribution, redrawn until
/// strictly positive.
fn sample_coefficient<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return mean;
    }
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let w = mean + sd * z;
        if w > 0.0 {
            return w;
        }
    }
}

/// Places a stub-matched random block on `members` (consecutive indices
/// starting at `offset`).
fn fill_block<R: Rng + ?Sized>(
    matrix: &mut ContactMatrix,
    spec: &NetworkSpec,
    offset: usize,
    size: usize,
    rng: &mut R,
) {
    let (count_mean, count_sd) = (spec.contact_count_mean, spec.contact_count_std_dev());
    let (coeff_mean, coeff_sd) = (spec.exposure_coeff_mean, spec.exposure_coeff_std_dev());
    let max_degree = size.saturating_sub(1);

    let mut stubs = Vec::new();
    for local in 0..size {
        let d = sample_contact_count(rng, count_mean, count_sd, max_degree);
        stubs.extend(std::iter::repeat_n(offset + local, d));
    }
    stubs.shuffle(rng);

    let mut placed = HashSet::new();
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        if a == b || !placed.insert((a, b)) {
            continue;
        }
        let w = sample_coefficient(rng, coeff_mean, coeff_sd);
        if w > 0.0 {
            matrix.set_symmetric(a, b, w);
        }
    }
}

/// Random contact matrix with stub-matched degrees and normal coefficients.
///
/// Every individual draws a target number of contacts; stubs are shuffled and
/// paired, self-loops and repeated pairs are dropped, and each surviving pair
/// gets one coefficient draw. The diagonal is the disease's recover
/// coefficient.
pub fn generate_contact_matrix<R: Rng + ?Sized>(
    spec: &NetworkSpec,
    disease: &DiseaseProfile,
    rng: &mut R,
) -> Result<ContactMatrix> {
    let flat = NetworkSpec {
        community: None,
        ..spec.clone()
    };
    flat.validate("network.")?;
    let mut m = ContactMatrix::isolated(spec.population, disease.recover_coefficient);
    fill_block(&mut m, &flat, 0, spec.population, rng);
    Ok(m)
}

/// Block-structured contact matrix: each community is generated like
/// [`generate_contact_matrix`], then every pair of communities is joined by
/// exactly `inter_community_links` distinct random cross edges.
pub fn generate_community_matrix<R: Rng + ?Sized>(
    spec: &NetworkSpec,
    disease: &DiseaseProfile,
    rng: &mut R,
) -> Result<ContactMatrix> {
    let community = spec.community.ok_or_else(|| {
        Error::parameter(
            "network.community",
            "a community network needs a community spec",
        )
    })?;
    spec.validate("network.")?;
    let size = community.community_size;
    let blocks = spec.population / size;
    let mut m = ContactMatrix::isolated(spec.population, disease.recover_coefficient);
    for b in 0..blocks {
        fill_block(&mut m, spec, b * size, size, rng);
    }

    let (coeff_mean, coeff_sd) = (spec.exposure_coeff_mean, spec.exposure_coeff_std_dev());
    for a in 0..blocks {
        for b in (a + 1)..blocks {
            let mut placed = HashSet::new();
            while placed.len() < community.inter_community_links {
                let u = a * size + rng.random_range(0..size);
                let v = b * size + rng.random_range(0..size);
                if placed.insert((u, v)) {
                    let w = sample_coefficient(rng, coeff_mean, coeff_sd);
                    m.set_symmetric(u, v, w);
                }
            }
        }
    }
    Ok(m)
}

/// Flat or community matrix depending on `spec.community`.
pub fn generate<R: Rng + ?Sized>(
    spec: &NetworkSpec,
    disease: &DiseaseProfile,
    rng: &mut R,
) -> Result<ContactMatrix> {
    match spec.community {
        Some(_) => generate_community_matrix(spec, disease, rng),
        None => generate_contact_matrix(spec, disease, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn fig1_spec(n: usize) -> NetworkSpec {
        NetworkSpec {
            population: n,
            contact_count_mean: 4.0,
            contact_count_spread: Some(2.0),
            exposure_coeff_mean: 0.4,
            exposure_coeff_spread: Some(0.2),
            ..NetworkSpec::default()
        }
    }

    #[test]
    fn hundred_individuals() {
        let disease = DiseaseProfile::new(0.7, 3.0, 0.9);
        let m = generate_contact_matrix(&fig1_spec(100), &disease, &mut rng_from_seed(1)).unwrap();
        assert_eq!(m.order(), 100);
        assert!(m.is_symmetric());
        assert!(m.is_non_negative());
        assert!((0..100).all(|i| m.diagonal(i) == 0.9));
        let mean_degree = 2.0 * m.edge_count() as f64 / 100.0;
        assert!((3.0..=5.0).contains(&mean_degree), "{mean_degree}");
    }

    #[test]
    fn single_individual_has_only_diagonal() {
        let spec = NetworkSpec {
            population: 1,
            contact_count_mean: 0.0,
            ..fig1_spec(1)
        };
        let m = generate_contact_matrix(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(3))
            .unwrap();
        assert_eq!(m.to_dense(), vec![vec![0.7]]);
    }

    #[test]
    fn single_individual_clamps_large_degree_draws() {
        // contact mean 0 but a wide spread still draws positive counts
        let spec = NetworkSpec {
            population: 1,
            contact_count_mean: 0.0,
            contact_count_spread: Some(5.0),
            ..fig1_spec(1)
        };
        let m = generate_contact_matrix(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(3))
            .unwrap();
        assert_eq!(m.to_dense(), vec![vec![0.7]]);
    }

    #[test]
    fn zero_population_is_rejected() {
        let spec = NetworkSpec {
            population: 0,
            ..NetworkSpec::default()
        };
        let err = generate_contact_matrix(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(0));
        assert!(
            matches!(err, Err(Error::Parameter { field, .. }) if field == "network.population")
        );
    }

    #[test]
    fn too_many_contacts_rejected() {
        let spec = NetworkSpec {
            population: 4,
            ..NetworkSpec::default()
        };
        assert!(spec.validate("").is_err());
    }

    #[test]
    fn community_validation() {
        let mut spec = NetworkSpec {
            population: 250,
            community: Some(CommunitySpec::default()),
            ..NetworkSpec::default()
        };
        assert!(spec.validate("").is_err());
        spec.population = 50;
        let err =
            generate_community_matrix(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(0));
        assert!(err.is_err());
    }

    #[test]
    fn community_edge_counts() {
        let spec = NetworkSpec {
            population: 2000,
            community: Some(CommunitySpec {
                community_size: 100,
                inter_community_links: 1,
            }),
            ..NetworkSpec::default()
        };
        let m = generate(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(11)).unwrap();
        let cross: usize = (0..2000)
            .map(|i| {
                m.contacts(i)
                    .filter(|&(j, _)| j > i && j / 100 != i / 100)
                    .count()
            })
            .sum();
        assert_eq!(cross, 190);
        assert!(m.is_symmetric());
    }

    #[test]
    fn spread_kind_conversion() {
        let spec = NetworkSpec {
            contact_count_spread: Some(4.0),
            exposure_coeff_spread: Some(0.04),
            spread_kind: SpreadKind::Variance,
            ..NetworkSpec::default()
        };
        assert_eq!(spec.contact_count_std_dev(), 2.0);
        assert!((spec.exposure_coeff_std_dev() - 0.2).abs() < 1e-15);
        let defaults = NetworkSpec::default();
        assert_eq!(defaults.contact_count_std_dev(), 2.0);
        assert_eq!(defaults.exposure_coeff_std_dev(), 0.065);
    }

    #[test]
    fn presets_are_valid() {
        for d in [
            DiseaseProfile::MALIGNANT,
            DiseaseProfile::MODERATE,
            DiseaseProfile::GENERAL,
        ] {
            d.validate("").unwrap();
        }
        assert!(DiseaseProfile::new(0.7, 0.7, 0.5).validate("").is_err());
        assert!(DiseaseProfile::new(0.7, 3.0, 1.5).validate("").is_err());
    }
}
