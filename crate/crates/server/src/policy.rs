use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::auth::Role;
use crate::error::ServerError;

fn default_grid() -> f64 {
    0.1
}

fn default_raw_roles() -> BTreeSet<Role> {
    BTreeSet::from([Role::Admin])
}

/// Location protection for one species: callers outside `raw_access_roles`
/// only ever see coordinates snapped to a `grid_degrees` lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivePolicy {
    pub species: String,
    #[serde(default = "default_grid")]
    pub grid_degrees: f64,
    #[serde(default = "default_raw_roles")]
    pub raw_access_roles: BTreeSet<Role>,
}

impl SensitivePolicy {
    pub fn new(species: impl Into<String>) -> Self {
        SensitivePolicy { species: species.into(), grid_degrees: default_grid(), raw_access_roles: default_raw_roles() }
    }

    pub fn validate(&self) -> Result<(), ServerError> {
        if !(self.grid_degrees > 0.0 && self.grid_degrees.is_finite()) {
            return Err(ServerError::Config(format!("{}: grid_degrees must be positive", self.species)));
        }
        Ok(())
    }
}

/// Snaps `x` to the nearest multiple of `grid`, halves away from zero.
pub fn snap(x: f64, grid: f64) -> f64 {
    let inv = 1.0 / grid;
    (x * inv).round() / inv
}

/// Snaps both coordinates to the policy grid. Idempotent.
///
/// ```
/// use photocensus_server::{obfuscate_location, SensitivePolicy};
/// let p = SensitivePolicy::new("grevys_zebra");
/// assert_eq!(obfuscate_location(1.2345, 36.7891, &p), (1.2, 36.8));
/// assert_eq!(obfuscate_location(-1.25, 36.75, &p), (-1.3, 36.8));
/// ```
pub fn obfuscate_location(lat: f64, lon: f64, policy: &SensitivePolicy) -> (f64, f64) {
    (snap(lat, policy.grid_degrees), snap(lon, policy.grid_degrees))
}

/// Sensitive-species policies keyed by species.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocationPolicies {
    by_species: BTreeMap<String, SensitivePolicy>,
}

impl LocationPolicies {
    pub fn new(policies: impl IntoIterator<Item = SensitivePolicy>) -> Result<Self, ServerError> {
        let mut by_species = BTreeMap::new();
        for p in policies {
            p.validate()?;
            if by_species.insert(p.species.clone(), p).is_some() {
                return Err(ServerError::Config("duplicate sensitive-species policy".into()));
            }
        }
        Ok(LocationPolicies { by_species })
    }

    /// Reads a JSON array of policies.
    pub fn load(path: &Path) -> Result<Self, ServerError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServerError::Config(format!("cannot read {}: {e}", path.display())))?;
        let list: Vec<SensitivePolicy> =
            serde_json::from_str(&text).map_err(|e| ServerError::Config(format!("sensitive policy: {e}")))?;
        LocationPolicies::new(list)
    }

    pub fn get(&self, species: &str) -> Option<&SensitivePolicy> {
        self.by_species.get(species)
    }

    /// Coordinates of a `species` sighting as `role` may see them.
    pub fn view(&self, species: &str, role: Role, lat: f64, lon: f64) -> (f64, f64) {
        match self.by_species.get(species) {
            Some(p) if !p.raw_access_roles.contains(&role) => obfuscate_location(lat, lon, p),
            _ => (lat, lon),
        }
    }
}
