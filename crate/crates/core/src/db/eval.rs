use serde::{Deserialize, Serialize};

use super::query::{rematch_with_tactile, QueryResult};
use super::record::FragmentRecord;
use super::store::FragmentDb;
use crate::error::Result;
use crate::matching::MatchParams;
use crate::partial::GapParams;
use crate::raster::BinaryMask;

/// The first six columns describe the visual query; the last three the
/// answer after any tactile rematch.
pub const EVAL_CSV_HEADER: &str = "query_id,top1_id,top1_correct,top3_correct,max_iou,fallback,final_top1_id,final_top1_correct,unknown";

/// Outcome of one retrieval against a known answer. `truth` is `None` for
/// a fragment that is not in the database.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub query_id: String,
    pub truth: Option<String>,
    pub top1_id: Option<String>,
    pub top1_correct: bool,
    pub top3_correct: bool,
    pub max_iou: f64,
    pub fallback: bool,
    pub rematched: bool,
    /// `None` when the fragment was declared unknown.
    pub final_top1_id: Option<String>,
    /// A held-out fragment is answered correctly by being declared unknown.
    pub final_top1_correct: bool,
    pub unknown: bool,
}

impl EvalRow {
    /// Scores a visual query alone, without rematching.
    pub fn score(query_id: &str, truth: Option<&str>, r: &QueryResult) -> Self {
        let top1_id = r.ranked.first().map(|h| h.id.clone());
        let in_top = |k: usize| truth.is_some_and(|t| r.ranked.iter().take(k).any(|h| h.id == t));
        EvalRow {
            query_id: query_id.into(),
            truth: truth.map(String::from),
            top1_correct: in_top(1),
            top3_correct: in_top(3),
            final_top1_correct: in_top(1),
            final_top1_id: top1_id.clone(),
            top1_id,
            max_iou: r.ranked.iter().filter_map(|h| h.iou).fold(0.0, f64::max),
            fallback: r.fallback_triggered,
            rematched: false,
            unknown: false,
        }
    }

    /// Replaces the final answer with a rematch outcome.
    pub fn with_rematch(mut self, r: &QueryResult) -> Self {
        self.rematched = true;
        self.unknown = r.unknown;
        self.final_top1_id = if r.unknown { None } else { r.ranked.first().map(|h| h.id.clone()) };
        self.final_top1_correct = match &self.truth {
            Some(t) => self.final_top1_id.as_deref() == Some(t.as_str()),
            None => self.unknown,
        };
        self
    }
}

/// A fragment to retrieve: its fresh mask, a probe record carrying the
/// fresh tactile profile and material label, and the expected record id.
#[derive(Debug, Clone)]
pub struct EvalQuery {
    pub mask: BinaryMask,
    pub probe: FragmentRecord,
    pub truth: Option<String>,
}

/// Visual query for every probe, followed by a tactile rematch when the
/// fallback fires or when the visual Top-1 is of another material than the
/// probe.
pub fn evaluate(db: &FragmentDb, queries: &[EvalQuery], gap: &GapParams, params: &MatchParams) -> Result<Vec<EvalRow>> {
    let all: Vec<&FragmentRecord> = db.records().collect();
    queries
        .iter()
        .map(|q| {
            let r = db.query(&q.mask, 3, gap)?;
            let row = EvalRow::score(&q.probe.id, q.truth.as_deref(), &r);
            let mismatch = match r.ranked.first() {
                Some(h) => db.get(&h.id)?.material != q.probe.material,
                None => true,
            };
            if r.fallback_triggered || mismatch {
                Ok(row.with_rematch(&rematch_with_tactile(&q.probe, &all, params)?))
            } else {
                Ok(row)
            }
        })
        .collect()
}

fn opt(s: &Option<String>) -> &str {
    s.as_deref().unwrap_or("")
}

pub fn eval_csv(rows: &[EvalRow]) -> String {
    let mut out = format!("{EVAL_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{},{},{},{}\n",
            r.query_id,
            opt(&r.top1_id),
            u8::from(r.top1_correct),
            u8::from(r.top3_correct),
            r.max_iou,
            u8::from(r.fallback),
            opt(&r.final_top1_id),
            u8::from(r.final_top1_correct),
            u8::from(r.unknown)
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    /// Queries whose answer is in the database.
    pub known: usize,
    pub top1: f64,
    pub top3: f64,
    /// Top-1 over known queries after rematching.
    pub final_top1: f64,
    pub mean_iou: f64,
    pub fallbacks: usize,
    pub rematches: usize,
    /// Held-out queries that were declared unknown, out of `held_out`.
    pub unknown_flagged: usize,
    pub held_out: usize,
}

impl EvalSummary {
    pub fn of(rows: &[EvalRow]) -> Self {
        let known: Vec<&EvalRow> = rows.iter().filter(|r| r.truth.is_some()).collect();
        let rate = |f: fn(&EvalRow) -> bool| {
            if known.is_empty() {
                0.0
            } else {
                known.iter().filter(|r| f(r)).count() as f64 / known.len() as f64
            }
        };
        EvalSummary {
            known: known.len(),
            top1: rate(|r| r.top1_correct),
            top3: rate(|r| r.top3_correct),
            final_top1: rate(|r| r.final_top1_correct),
            mean_iou: if rows.is_empty() {
                0.0
            } else {
                rows.iter().map(|r| r.max_iou).sum::<f64>() / rows.len() as f64
            },
            fallbacks: rows.iter().filter(|r| r.fallback).count(),
            rematches: rows.iter().filter(|r| r.rematched).count(),
            unknown_flagged: rows.iter().filter(|r| r.truth.is_none() && r.unknown).count(),
            held_out: rows.len() - known.len(),
        }
    }
}
