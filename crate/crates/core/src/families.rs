//! Triacontagon profiles: which 15-ray blocks A..H a basis draws from.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthostruct::{Basis, BasisTable};
use crate::rayset::{check_ray, RayId};

pub const LETTERS: [char; 8] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'];

pub fn letter_of(id: RayId) -> Result<char> {
    check_ray(id as u32)?;
    Ok(LETTERS[(id as usize - 1) / 15])
}

/// Sorted multiset of eight block letters.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Profile([u8; 8]);

impl Profile {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("ascii letters")
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Profile> {
        let upper = s.to_ascii_uppercase();
        let mut bytes: [u8; 8] = upper
            .as_bytes()
            .try_into()
            .map_err(|_| Error::UnknownSelector(s.into()))?;
        if !bytes.iter().all(|b| (b'A'..=b'H').contains(b)) {
            return Err(Error::UnknownSelector(s.into()));
        }
        bytes.sort_unstable();
        Ok(Profile(bytes))
    }
}

pub fn profile_of(basis: &Basis) -> Profile {
    let mut bytes = [0u8; 8];
    for (slot, &r) in bytes.iter_mut().zip(basis.rays()) {
        *slot = b'A' + ((r as usize - 1) / 15) as u8;
    }
    bytes.sort_unstable();
    Profile(bytes)
}

/// A set of profiles and the table bases carrying them.
#[derive(Debug, Clone)]
pub struct Family {
    pub name: String,
    pub profiles: Vec<Profile>,
    /// Indices into the basis table, ascending.
    pub bases: Vec<usize>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

pub fn classify_table(table: &BasisTable) -> BTreeMap<Profile, Vec<usize>> {
    let mut out: BTreeMap<Profile, Vec<usize>> = BTreeMap::new();
    for (k, b) in table.bases().iter().enumerate() {
        out.entry(profile_of(b)).or_default().push(k);
    }
    out
}

/// The two spellings of the C-containing Type-1 profile in circulation.
pub const TYPE1_CANDIDATES: [&str; 5] =
    ["AAEEEEHH", "BBFFFFGG", "CCEEGGGG", "CCEEEEGG", "DDFFHHHH"];
pub const TYPE2_PROFILES: [&str; 2] = ["AABBEEFF", "CCDDGGHH"];
pub const TYPE3_PROFILES: [&str; 1] = ["EEFFGGHH"];
pub const TYPE4_PROFILES: [&str; 1] = ["AABBCCDD"];

/// Type-1 profiles are the candidates that name a 15-basis family whose
/// bases together form a parity proof.
pub fn resolve_type1_profiles(table: &BasisTable) -> Vec<Profile> {
    let classes = classify_table(table);
    TYPE1_CANDIDATES
        .iter()
        .filter_map(|s| {
            let p: Profile = s.parse().ok()?;
            let members = classes.get(&p)?;
            let masks: Vec<_> = members.iter().map(|&k| table.masks()[k]).collect();
            (members.len() == 15 && crate::proofsearch::is_parity_proof(&masks).0).then_some(p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySelector {
    Type(u8),
    Profile(Profile),
}

impl FromStr for FamilySelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilySelector> {
        match s.to_ascii_lowercase().as_str() {
            "type1" => Ok(FamilySelector::Type(1)),
            "type2" => Ok(FamilySelector::Type(2)),
            "type3" => Ok(FamilySelector::Type(3)),
            "type4" => Ok(FamilySelector::Type(4)),
            _ => Ok(FamilySelector::Profile(s.parse()?)),
        }
    }
}

impl fmt::Display for FamilySelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySelector::Type(t) => write!(f, "type{t}"),
            FamilySelector::Profile(p) => write!(f, "{p}"),
        }
    }
}

pub fn select_family(table: &BasisTable, selector: &FamilySelector) -> Result<Family> {
    let profiles: Vec<Profile> = match selector {
        FamilySelector::Type(1) => resolve_type1_profiles(table),
        FamilySelector::Type(2) => TYPE2_PROFILES
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?,
        FamilySelector::Type(3) => TYPE3_PROFILES
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?,
        FamilySelector::Type(4) => TYPE4_PROFILES
            .iter()
            .map(|s| s.parse())
            .collect::<Result<_>>()?,
        FamilySelector::Type(t) => return Err(Error::UnknownSelector(format!("type{t}"))),
        FamilySelector::Profile(p) => vec![*p],
    };
    let classes = classify_table(table);
    let mut bases: Vec<usize> = profiles
        .iter()
        .filter_map(|p| classes.get(p))
        .flatten()
        .copied()
        .collect();
    bases.sort_unstable();
    if bases.is_empty() {
        return Err(Error::UnknownSelector(selector.to_string()));
    }
    Ok(Family {
        name: selector.to_string(),
        profiles,
        bases,
    })
}
