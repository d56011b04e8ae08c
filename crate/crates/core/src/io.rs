//! JSON net files, marking and Parikh files, and result records.
//!
//! A net file looks like
//!
//! ```json
//! {
//!   "header": { "format_version": "1", "name": "fig1" },
//!   "places": [ { "id": "p1", "initial": "1" }, { "id": "p2", "initial": "0" } ],
//!   "transitions": [ { "id": "t1", "in": { "p1": 2 }, "out": { "p2": 1 } } ]
//! }
//! ```
//!
//! Masses are strings holding an integer, a fraction `p/q` or a decimal;
//! arc weights are natural numbers. Serialization is canonical: places and
//! transitions are sorted by id and rationals are written in lowest terms.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CpnError, Result};
use crate::net::{Cpn, Marking, Parikh, TransitionSet};
use crate::rational::Rational;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub format_version: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceEntry {
    pub id: String,
    pub initial: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionEntry {
    pub id: String,
    #[serde(rename = "in", default, deserialize_with = "unique_map")]
    pub input: BTreeMap<String, u32>,
    #[serde(rename = "out", default, deserialize_with = "unique_map")]
    pub output: BTreeMap<String, u32>,
}

/// The on-disk representation of a marked net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetFile {
    pub header: Header,
    pub places: Vec<PlaceEntry>,
    pub transitions: Vec<TransitionEntry>,
}

fn unique_map<'de, D, V>(de: D) -> std::result::Result<BTreeMap<String, V>, D::Error>
where
    D: Deserializer<'de>,
    V: Deserialize<'de>,
{
    struct UniqueMap<V>(std::marker::PhantomData<V>);

    impl<'de, V: Deserialize<'de>> Visitor<'de> for UniqueMap<V> {
        type Value = BTreeMap<String, V>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map from identifiers to values")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
            let mut map = BTreeMap::new();
            while let Some((k, v)) = access.next_entry::<String, V>()? {
                if map.insert(k.clone(), v).is_some() {
                    return Err(serde::de::Error::custom(format!("duplicate key `{k}`")));
                }
            }
            Ok(map)
        }
    }

    de.deserialize_map(UniqueMap(std::marker::PhantomData))
}

fn json_error(e: serde_json::Error) -> CpnError {
    CpnError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Position of the first occurrence of `"needle"` in `text`, for semantic
/// errors that serde cannot locate.
fn locate(text: &str, needle: &str, message: String) -> CpnError {
    let quoted = format!("\"{needle}\"");
    let (line, column) = match text.find(&quoted) {
        Some(offset) => {
            let before = &text[..offset];
            let line = before.matches('\n').count() + 1;
            let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (line, column)
        }
        None => (0, 0),
    };
    CpnError::Parse { line, column, message }
}

impl NetFile {
    pub fn from_net(net: &Cpn, m0: &Marking) -> Result<Self> {
        if m0.len() != net.num_places() {
            return Err(CpnError::Dimension {
                expected: net.num_places(),
                actual: m0.len(),
            });
        }
        let places = net
            .places()
            .iter()
            .zip(m0.as_slice())
            .map(|(id, initial)| PlaceEntry {
                id: id.clone(),
                initial: initial.clone(),
            })
            .collect();
        let arcs = |list: &[(usize, u32)]| list.iter().map(|&(p, w)| (net.places()[p].clone(), w)).collect();
        let transitions = net
            .transitions()
            .iter()
            .enumerate()
            .map(|(t, id)| TransitionEntry {
                id: id.clone(),
                input: arcs(net.pre(t)),
                output: arcs(net.post(t)),
            })
            .collect();
        Ok(NetFile {
            header: Header {
                format_version: FORMAT_VERSION.into(),
                name: net.name().into(),
                generator: None,
            },
            places,
            transitions,
        })
    }

    /// Validates the file contents and builds the net, keeping file order.
    pub fn to_net(&self) -> Result<(Cpn, Marking)> {
        self.build(None)
    }

    fn build(&self, text: Option<&str>) -> Result<(Cpn, Marking)> {
        let err = |needle: &str, message: String| match text {
            Some(t) => locate(t, needle, message),
            None => CpnError::InvalidNet(message),
        };
        if self.header.format_version != FORMAT_VERSION {
            return Err(err(
                "format_version",
                format!("unsupported format version `{}`", self.header.format_version),
            ));
        }
        let mut index = BTreeMap::new();
        for (i, p) in self.places.iter().enumerate() {
            if index.insert(p.id.as_str(), i).is_some() {
                return Err(err(&p.id, format!("duplicate place `{}`", p.id)));
            }
            if p.initial.is_negative() {
                return Err(err(&p.id, format!("negative initial mass {} on `{}`", p.initial, p.id)));
            }
        }
        let (np, nt) = (self.places.len(), self.transitions.len());
        let mut input = vec![vec![0u32; nt]; np];
        let mut output = vec![vec![0u32; nt]; np];
        for (t, tr) in self.transitions.iter().enumerate() {
            for (arcs, m) in [(&tr.input, &mut input), (&tr.output, &mut output)] {
                for (p, &w) in arcs {
                    let &pi = index.get(p.as_str()).ok_or_else(|| {
                        err(
                            &tr.id,
                            format!("transition `{}` references undeclared place `{p}`", tr.id),
                        )
                    })?;
                    m[pi][t] = w;
                }
            }
        }
        let places = self.places.iter().map(|p| p.id.clone()).collect();
        let transitions: Vec<String> = self.transitions.iter().map(|t| t.id.clone()).collect();
        let net = Cpn::new(self.header.name.clone(), places, transitions, input, output).map_err(|e| match e {
            CpnError::InvalidNet(msg) => {
                let needle = msg.split('`').nth(1).unwrap_or("").to_string();
                err(&needle, msg)
            }
            other => other,
        })?;
        let m0 = Marking::new(self.places.iter().map(|p| p.initial.clone()).collect())?;
        Ok((net, m0))
    }

    /// Sorts places and transitions by id.
    pub fn canonicalize(&mut self) {
        self.places.sort_by(|a, b| a.id.cmp(&b.id));
        self.transitions.sort_by(|a, b| a.id.cmp(&b.id));
        for t in &mut self.transitions {
            t.input.retain(|_, w| *w > 0);
            t.output.retain(|_, w| *w > 0);
        }
    }
}

/// Parses a net file. Errors carry the line and column of the offending
/// token where possible.
pub fn parse_net(text: &str) -> Result<(Cpn, Marking)> {
    let file: NetFile = serde_json::from_str(text).map_err(json_error)?;
    file.build(Some(text))
}

/// Like [`parse_net`], also returning the header.
pub fn parse_net_file(text: &str) -> Result<(Cpn, Marking, Header)> {
    let file: NetFile = serde_json::from_str(text).map_err(json_error)?;
    let (net, m0) = file.build(Some(text))?;
    Ok((net, m0, file.header))
}

/// Canonical text of a marked net.
pub fn serialize_net(net: &Cpn, m0: &Marking) -> Result<String> {
    serialize_net_with(net, m0, None)
}

pub fn serialize_net_with(net: &Cpn, m0: &Marking, generator: Option<&str>) -> Result<String> {
    let mut file = NetFile::from_net(net, m0)?;
    file.header.generator = generator.map(str::to_string);
    file.canonicalize();
    let mut text = serde_json::to_string_pretty(&file).expect("net files always serialize");
    text.push('\n');
    Ok(text)
}

/// Parses `{"place": "mass", ...}`; omitted places get mass 0.
pub fn parse_marking(net: &Cpn, text: &str) -> Result<Marking> {
    let map: BTreeMap<String, Rational> = parse_unique_map(text)?;
    let mut mass = vec![Rational::zero(); net.num_places()];
    for (id, x) in map {
        let p = net
            .place_index(&id)
            .map_err(|_| locate(text, &id, format!("unknown place `{id}`")))?;
        mass[p] = x;
    }
    Marking::new(mass)
}

/// Parses `{"transition": "amount", ...}`; omitted transitions get 0.
pub fn parse_parikh(net: &Cpn, text: &str) -> Result<Parikh> {
    let map: BTreeMap<String, Rational> = parse_unique_map(text)?;
    let mut amount = vec![Rational::zero(); net.num_transitions()];
    for (id, x) in map {
        let t = net
            .transition_index(&id)
            .map_err(|_| locate(text, &id, format!("unknown transition `{id}`")))?;
        amount[t] = x;
    }
    Parikh::new(amount)
}

fn parse_unique_map(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut de = serde_json::Deserializer::from_str(text);
    let map = unique_map(&mut de).map_err(json_error)?;
    de.end().map_err(json_error)?;
    Ok(map)
}

/// Nonzero entries of a marking, keyed by place id.
pub fn marking_map(net: &Cpn, m: &Marking) -> BTreeMap<String, Rational> {
    m.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(p, x)| (net.places()[p].clone(), x.clone()))
        .collect()
}

/// Nonzero entries of a Parikh vector, keyed by transition id.
pub fn parikh_map(net: &Cpn, v: &Parikh) -> BTreeMap<String, Rational> {
    v.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(t, x)| (net.transitions()[t].clone(), x.clone()))
        .collect()
}

/// Sorted transition ids.
pub fn support_ids(net: &Cpn, s: &TransitionSet) -> Vec<String> {
    let mut ids = net.transition_names(s);
    ids.sort();
    ids
}

/// A query result as written by the command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    #[serde(rename = "yield", default, skip_serializing_if = "Option::is_none")]
    pub yield_value: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub support: Vec<String>,
    pub parikh: BTreeMap<String, Rational>,
    pub queries_or_cuts: usize,
    pub wall_time_ms: f64,
}
