//! Bundled models and the 39-bus generation-adequacy report.

use serde::Serialize;

use crate::dsl::{parse, Model};
use crate::engine::{saidi_routes, LoadRow};
use crate::error::{Error, Result};
use crate::lifetime::Assignment;
use crate::montecarlo::{mcs_joint, McsEstimate};
use crate::oracle::exact_prob;
use crate::target::Target;

pub const MCC: &str = include_str!("../models/mcc.ccd");
pub const MCC_COMPLETE: &str = include_str!("../models/mcc_complete.ccd");
pub const IEEE39: &str = include_str!("../models/ieee39.ccd");

/// Bundled model text by file name, with or without the extension.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".ccd") {
        "mcc" => Some(MCC),
        "mcc_complete" => Some(MCC_COMPLETE),
        "ieee39" => Some(IEEE39),
        _ => None,
    }
}

pub fn bundled_model(name: &str) -> Result<Model> {
    let text = bundled(name).ok_or_else(|| Error::UnknownTarget(name.to_string()))?;
    parse(text).map_err(|d| Error::InvalidArgument(format!("bundled model `{name}` does not parse: {d:?}")))
}

/// Published figures for the 39-bus study at one year.
pub mod reference {
    pub const FOR_PV: f64 = 99.19e-2;
    pub const FOR_STEAM: f64 = 38.87e-3;
    pub const SAIDI: f64 = 6.3728;
    /// Averages of the published simulation runs.
    pub const MCS_FOR_PV: f64 = 98.93e-2;
    pub const MCS_FOR_STEAM: f64 = 38.85e-3;
    pub const MCS_SAIDI: f64 = 6.3549;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexRow {
    pub name: &'static str,
    pub closed: f64,
    pub oracle: f64,
    pub mcs: McsEstimate,
    pub reference: f64,
    pub mcs_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaidiRow {
    pub closed: f64,
    pub oracle: f64,
    pub exactly_one: f64,
    pub mcs: f64,
    pub reference: f64,
    pub mcs_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case39Report {
    pub t_years: f64,
    pub samples: usize,
    pub seed: u64,
    pub for_pv: IndexRow,
    pub for_steam: IndexRow,
    pub loads: Vec<LoadRow>,
    pub saidi: SaidiRow,
}

fn index_row(
    model: &Model,
    assign: &Assignment,
    name: &'static str,
    refs: (f64, f64),
    mcs: McsEstimate,
    cap: usize,
) -> Result<IndexRow> {
    let ft = model.resolve_ft(name)?;
    Ok(IndexRow {
        name,
        closed: ft.prob_closed(assign)?,
        oracle: exact_prob(Target::Ft(&ft), assign, cap)?.probability,
        mcs,
        reference: refs.0,
        mcs_reference: refs.1,
    })
}

pub fn case39(t_years: f64, samples: usize, seed: u64, cap: usize) -> Result<Case39Report> {
    let model = bundled_model("ieee39")?;
    let assign = model.assignment(t_years)?;
    let pv = model.resolve_ft("FOR_PV")?;
    let steam = model.resolve_ft("FOR_STEAM")?;
    let mut sampled = mcs_joint(&[Target::Ft(&pv), Target::Ft(&steam)], &assign, samples, seed)?;
    let steam_est = sampled.pop().expect("two targets");
    let pv_est = sampled.pop().expect("two targets");
    let for_pv = index_row(&model, &assign, "FOR_PV", (reference::FOR_PV, reference::MCS_FOR_PV), pv_est, cap)?;
    let for_steam = index_row(
        &model,
        &assign,
        "FOR_STEAM",
        (reference::FOR_STEAM, reference::MCS_FOR_STEAM),
        steam_est,
        cap,
    )?;
    let routes = saidi_routes(&model, t_years, cap, Some((samples, seed)))?;
    Ok(Case39Report {
        t_years,
        samples,
        seed,
        for_pv,
        for_steam,
        saidi: SaidiRow {
            closed: routes.closed.saidi_hours,
            oracle: routes.oracle,
            exactly_one: routes.exactly_one.expect("every 39-bus load is an exactly-one consequence"),
            mcs: routes.mcs.expect("sampling requested"),
            reference: reference::SAIDI,
            mcs_reference: reference::MCS_SAIDI,
        },
        loads: routes.loads,
    })
}
