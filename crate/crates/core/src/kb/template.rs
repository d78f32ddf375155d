use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize};

use crate::corpus::parse_loose_date;

/// A knowledgebase candidate as extracted from Wikidata/Wikipedia, before pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityCandidate {
    pub qid: String,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub occupations: Vec<String>,
    pub instance_type: String,
    #[serde(default, deserialize_with = "loose_date")]
    pub birth_date: Option<NaiveDate>,
    #[serde(default, deserialize_with = "loose_date")]
    pub death_date: Option<NaiveDate>,
    #[serde(default)]
    pub page_title: Option<String>,
    #[serde(default)]
    pub first_paragraph: String,
}

fn loose_date<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NaiveDate>, D::Error> {
    let raw: Option<String> = Option::deserialize(d)?;
    match raw.as_deref().map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => parse_loose_date(s)
            .map(Some)
            .ok_or_else(|| serde::de::Error::custom(format!("unparseable date {s:?}"))),
    }
}

/// A retained knowledgebase entry with its rendered description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityTemplate {
    pub qid: String,
    pub label: String,
    pub aliases: Vec<String>,
    pub occupations: Vec<String>,
    pub instance_type: String,
    pub birth_date: Option<NaiveDate>,
    pub death_date: Option<NaiveDate>,
    pub first_paragraph: String,
    pub template_text: String,
    #[serde(default)]
    pub qrank: u64,
}

impl EntityTemplate {
    pub fn from_candidate(c: &EntityCandidate) -> Self {
        EntityTemplate {
            qid: c.qid.clone(),
            label: c.label.clone(),
            aliases: c.aliases.clone(),
            occupations: c.occupations.clone(),
            instance_type: c.instance_type.clone(),
            birth_date: c.birth_date,
            death_date: c.death_date,
            first_paragraph: c.first_paragraph.clone(),
            template_text: render_template(&c.label, &c.instance_type, &c.aliases, &c.occupations, &c.first_paragraph),
            qrank: 0,
        }
    }
}

/// Joins items as an English list with an Oxford comma:
/// `a`, `a and b`, `a, b, and c`.
pub fn oxford_list<S: AsRef<str>>(items: &[S]) -> String {
    match items {
        [] => String::new(),
        [one] => one.as_ref().to_string(),
        [a, b] => format!("{} and {}", a.as_ref(), b.as_ref()),
        [init @ .., last] => {
            let mut s = String::new();
            for item in init {
                s.push_str(item.as_ref());
                s.push_str(", ");
            }
            s.push_str("and ");
            s.push_str(last.as_ref());
            s
        }
    }
}

/// `"{label} is of type {type}. Also known as {aliases}. Has worked as
/// {occupations}. {first paragraph}"`, eliding the alias and occupation
/// sentences when their lists are empty.
pub fn render_template<S: AsRef<str>>(
    label: &str,
    instance_type: &str,
    aliases: &[S],
    occupations: &[S],
    first_paragraph: &str,
) -> String {
    let mut out = format!("{label} is of type {instance_type}.");
    if !aliases.is_empty() {
        out.push_str(" Also known as ");
        out.push_str(&oxford_list(aliases));
        out.push('.');
    }
    if !occupations.is_empty() {
        out.push_str(" Has worked as ");
        out.push_str(&oxford_list(occupations));
        out.push('.');
    }
    out.push(' ');
    out.push_str(first_paragraph);
    out
}
