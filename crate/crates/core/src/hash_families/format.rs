//! JSON form of a hash family.
//!
//! ```json
//! { "kind": "derandomized", "n": 8, "m_count": 281474976710656,
//!   "delta": 0.0625, "field_degree": 12, "field_poly": "0x1053", "index_poly": "0x11d" }
//! ```
//!
//! A derandomized family without `members` is the complete seed space; with
//! `members` it is the listed sub-family, each member written as
//! `"<hi.x>:<hi.y>:<lo.x>:<lo.y>"` in hex. Matrix families carry the labeled
//! `support` and their rows as hex indices; explicit tables carry one string
//! per member with one symbol character per input.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::family::{
    build_matrix_family_floor, ConstructionKind, DerandomizedHash, DerandomizedSpace,
    FamilyMembers, HashFamily, HashFunctionDescriptor, SeedPair,
};
use super::field::MODULI;
use super::small_bias::SeedPoint;
use super::HashError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub kind: String,
    pub n: u32,
    pub m_count: u128,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_poly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_poly: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<String>>,
}

fn hex(v: u64) -> String {
    format!("{v:#x}")
}

fn parse_hex(s: &str) -> Result<u64, HashError> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|e| HashError::Format(format!("bad hex {s:?}: {e}")))
}

fn seed_pair_string(p: SeedPair) -> String {
    format!("{:x}:{:x}:{:x}:{:x}", p.hi.x, p.hi.y, p.lo.x, p.lo.y)
}

fn parse_seed_pair(s: &str, space: &DerandomizedSpace) -> Result<SeedPair, HashError> {
    let parts: Vec<u64> = s.split(':').map(parse_hex).collect::<Result<_, _>>()?;
    if parts.len() != 4 {
        return Err(HashError::Format(format!(
            "member {s:?} needs four seed parts"
        )));
    }
    let field = space.seed_space().field();
    if parts.iter().any(|&p| !field.contains(p)) {
        return Err(HashError::Format(format!(
            "member {s:?} has a seed outside GF(2^{})",
            field.degree()
        )));
    }
    Ok(SeedPair {
        hi: SeedPoint {
            x: parts[0],
            y: parts[1],
        },
        lo: SeedPoint {
            x: parts[2],
            y: parts[3],
        },
    })
}

impl FamilyFile {
    pub fn from_family(family: &HashFamily) -> Result<Self, HashError> {
        let kind = family.kind().ok_or_else(|| {
            HashError::Format("families mixing construction kinds are not serializable".into())
        })?;
        let mut file = FamilyFile {
            kind: kind.as_str().to_string(),
            n: family.n(),
            m_count: family.m_count(),
            delta: None,
            field_degree: None,
            field_poly: None,
            index_poly: None,
            support: None,
            members: None,
        };
        let space_fields = |file: &mut FamilyFile, space: &DerandomizedSpace| {
            file.delta = Some(space.delta());
            file.field_degree = Some(space.field_degree());
            file.field_poly = Some(hex(space.seed_space().field().modulus()));
            file.index_poly = Some(hex(space.composed().map().index_field().modulus()));
        };
        match family.members() {
            FamilyMembers::SeedSpace(space) => space_fields(&mut file, space),
            FamilyMembers::Listed(members) => match kind {
                ConstructionKind::Derandomized => {
                    let mut strings = Vec::with_capacity(members.len());
                    for h in members {
                        if let HashFunctionDescriptor::Derandomized(d) = h {
                            if file.field_degree.is_none() {
                                space_fields(&mut file, &d.space);
                            } else if file.field_degree != Some(d.space.field_degree()) {
                                return Err(HashError::Format(
                                    "members use different seed spaces".into(),
                                ));
                            }
                            strings.push(seed_pair_string(d.seeds));
                        }
                    }
                    file.members = Some(strings);
                }
                ConstructionKind::Matrix => {
                    let mut rows = Vec::with_capacity(members.len());
                    for h in members {
                        if let HashFunctionDescriptor::Matrix(m) = h {
                            if file.support.is_none() {
                                file.support =
                                    Some(m.support.strings().iter().map(|&s| hex(s)).collect());
                            }
                            rows.push(hex(m.row as u64));
                        }
                    }
                    file.members = Some(rows);
                }
                ConstructionKind::ExplicitTable => {
                    let tables = members
                        .iter()
                        .filter_map(|h| match h {
                            HashFunctionDescriptor::Table(t) => {
                                Some(t.table.iter().map(|&s| char::from(b'0' + s)).collect())
                            }
                            _ => None,
                        })
                        .collect();
                    file.members = Some(tables);
                }
            },
        }
        Ok(file)
    }

    pub fn into_family(self) -> Result<HashFamily, HashError> {
        let family = match self.kind.as_str() {
            "derandomized" => {
                let degree = self.field_degree.ok_or_else(|| {
                    HashError::Format("derandomized family needs field_degree".into())
                })?;
                let delta = self.delta.unwrap_or(f64::NAN);
                let space = Arc::new(DerandomizedSpace::with_degree(self.n, delta, degree)?);
                for (label, poly, d) in [
                    ("field_poly", &self.field_poly, degree),
                    ("index_poly", &self.index_poly, self.n),
                ] {
                    if let Some(p) = poly {
                        if parse_hex(p)? != MODULI[d as usize] {
                            return Err(HashError::Format(format!(
                                "{label} {p} is not the modulus used for degree {d}"
                            )));
                        }
                    }
                }
                match self.members {
                    None => HashFamily::seed_space(space),
                    Some(list) => {
                        let members = list
                            .iter()
                            .map(|s| {
                                Ok(HashFunctionDescriptor::Derandomized(DerandomizedHash {
                                    space: space.clone(),
                                    seeds: parse_seed_pair(s, &space)?,
                                }))
                            })
                            .collect::<Result<Vec<_>, HashError>>()?;
                        HashFamily::from_members(self.n, members)?
                    }
                }
            }
            "matrix" => {
                let support: Vec<u64> = self
                    .support
                    .as_deref()
                    .ok_or_else(|| HashError::Format("matrix family needs support".into()))?
                    .iter()
                    .map(|s| parse_hex(s))
                    .collect::<Result<_, _>>()?;
                let k = support.len();
                if k < 4 || !k.is_power_of_two() {
                    return Err(HashError::Format(format!(
                        "support of {k} strings is not a power of 2 >= 4"
                    )));
                }
                let full = build_matrix_family_floor(self.n, &support)?;
                match self.members {
                    None => full,
                    Some(rows) => {
                        let idx = rows
                            .iter()
                            .map(|r| parse_hex(r).map(u128::from))
                            .collect::<Result<Vec<_>, _>>()?;
                        full.restrict(idx)?
                    }
                }
            }
            "explicit-table" => {
                let list = self.members.ok_or_else(|| {
                    HashError::Format("explicit-table family needs members".into())
                })?;
                let members = list
                    .iter()
                    .map(|s| {
                        let table = s
                            .bytes()
                            .map(|b| match b {
                                b'0'..=b'3' => Ok(b - b'0'),
                                _ => {
                                    Err(HashError::Format(format!("table symbol {:?}", b as char)))
                                }
                            })
                            .collect::<Result<Vec<u8>, _>>()?;
                        HashFunctionDescriptor::table(self.n, table)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                HashFamily::from_members(self.n, members)?
            }
            other => return Err(HashError::Format(format!("unknown family kind {other:?}"))),
        };
        if family.m_count() != self.m_count {
            return Err(HashError::Format(format!(
                "m_count {} does not match {} members",
                self.m_count,
                family.m_count()
            )));
        }
        Ok(family)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HashError> {
        serde_json::from_str(text).map_err(|e| HashError::Format(e.to_string()))
    }
}
