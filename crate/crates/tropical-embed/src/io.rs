//! Exact JSON wire formats for graphs, embeddings, and reports.
//!
//! All geometric quantities travel as canonical strings: rationals as
//! `"p/q"` in lowest terms with positive denominator (bare integer when
//! the denominator is one), integers as decimal strings, value-group
//! scalars as coefficient maps keyed by generator label with the unit
//! generator under `"1"`. JSON numbers appear only for indices, counts,
//! and flags, so no quantity is ever rounded. Emission is canonical:
//! parsing an emitted document and emitting it again reproduces the
//! bytes exactly.
//!
//! A graph document is `{"vertices": [...], "edges": [...], "lambda":
//! {...}?}`; irrational edge lengths live in the optional
//! `lambda.lengths_in_lambda` side table, keyed by edge id. An embedding
//! document wraps the original input graph, the modification trace, the
//! embedded (normalized) graph, the complex, the edge-image map, and the
//! certification report, which is everything the independent verifier
//! needs to re-certify a stored embedding from scratch.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda::{Generator, LambdaContext, LambdaScalar};
use crate::lattice::{Complex, Point, PrimitiveVector, Ray, Segment};
use crate::metric_graph::{Edge, EdgeLength, MetricGraph, ModificationTrace, Move, VertexKind};
use crate::pipeline::{EdgeImage, EmbeddingMap};
use crate::rat::{format_rat, parse_rat};
use crate::verify::{CheckEntry, Report};

/// A parsed embedding document: everything needed to re-verify,
/// re-render, or transform a stored embedding.
#[derive(Clone, Debug)]
pub struct EmbeddingDocument {
    pub complex: Complex,
    pub map: EmbeddingMap,
    pub original: MetricGraph,
    pub report: Report,
}

// ---------------------------------------------------------------------
// Wire shapes. Private mirrors of the domain types with every scalar a
// string; serde handles JSON, the conversion functions handle exactness
// and schema checking.
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarDoc {
    Plain(String),
    Coeffs(BTreeMap<String, String>),
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    vertices: Vec<usize>,
    /// Present only when the infinite endpoints cannot be read off the
    /// degrees (an infinite edge whose endpoints are both leaves).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    infinite_vertices: Option<Vec<usize>>,
    edges: Vec<EdgeDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lambda: Option<LambdaDoc>,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: usize,
    u: usize,
    v: usize,
    /// `"p/q"` or `"inf"`; absent when the length is declared in the
    /// `lengths_in_lambda` side table instead.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    length: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct LambdaDoc {
    generators: Vec<GeneratorDoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lengths_in_lambda: Option<BTreeMap<String, BTreeMap<String, String>>>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorDoc {
    label: String,
    enclosure: String,
    /// Generators with a known exact rational value are folded into the
    /// rational part at parse time (see `parse_lambda`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    exact: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
enum MoveDoc {
    Subdivide {
        edge: usize,
        lengths: (LengthDoc, LengthDoc),
    },
    ReverseSubdivide {
        vertex: usize,
    },
    AddInfiniteLeaf {
        vertex: usize,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LengthDoc {
    Plain(String),
    Coeffs(BTreeMap<String, String>),
}

#[derive(Serialize, Deserialize)]
struct ComplexDoc {
    vertices: Vec<PointDoc>,
    segments: Vec<SegmentDoc>,
    rays: Vec<RayDoc>,
}

#[derive(Serialize, Deserialize)]
struct PointDoc {
    x: ScalarDoc,
    y: ScalarDoc,
}

#[derive(Serialize, Deserialize)]
struct SegmentDoc {
    a: usize,
    b: usize,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct RayDoc {
    apex: usize,
    dir: [String; 2],
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct MapDoc {
    vertex_image: BTreeMap<String, usize>,
    edge_images: BTreeMap<String, EdgeImageDoc>,
    claimed_crossings: u32,
    crossings_exact: bool,
    lambda_mode: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeImageDoc {
    Chain { chain: Vec<usize> },
    Ray { ray: usize },
}

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    balanced: bool,
    isometric: bool,
    crossings_on_gamma: u32,
    crossings_exact: bool,
    ray_crossings: u64,
    unit_weights: bool,
    lambda_certified: Option<bool>,
    geometry_valid: bool,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    category: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingDoc {
    input: GraphDoc,
    trace: Vec<MoveDoc>,
    graph: GraphDoc,
    complex: ComplexDoc,
    map: MapDoc,
    report: ReportDoc,
}

// ---------------------------------------------------------------------
// Scalars.
// ---------------------------------------------------------------------

/// Declared value group of a document: the irrational generator table
/// plus the exact-valued generators folded away at parse time.
struct ParsedLambda {
    ctx: Arc<LambdaContext>,
    folded: BTreeMap<String, BigRational>,
}

impl ParsedLambda {
    fn rationals() -> ParsedLambda {
        ParsedLambda {
            ctx: LambdaContext::rationals(),
            folded: BTreeMap::new(),
        }
    }
}

fn scalar_to_doc(s: &LambdaScalar) -> ScalarDoc {
    if s.is_rational() {
        ScalarDoc::Plain(format_rat(s.rat_part()))
    } else {
        ScalarDoc::Coeffs(
            s.to_label_map()
                .iter()
                .map(|(l, c)| (l.clone(), format_rat(c)))
                .collect(),
        )
    }
}

fn coeffs_to_scalar(map: &BTreeMap<String, String>, lam: &ParsedLambda) -> Result<LambdaScalar> {
    let mut rat = BigRational::zero();
    let mut coeffs: BTreeMap<u32, BigRational> = BTreeMap::new();
    for (label, text) in map {
        let c = parse_rat(text)?;
        if label == "1" {
            rat += c;
        } else if let Some(exact) = lam.folded.get(label) {
            rat += c * exact;
        } else if let Some(idx) = lam.ctx.index_of(label) {
            coeffs.insert(idx, c);
        } else {
            return Err(Error::Parse {
                message: format!("unknown generator label {label:?}"),
            });
        }
    }
    Ok(LambdaScalar::from_coeffs(&lam.ctx, rat, coeffs))
}

fn scalar_from_doc(doc: &ScalarDoc, lam: &ParsedLambda) -> Result<LambdaScalar> {
    match doc {
        ScalarDoc::Plain(s) => Ok(LambdaScalar::from_rat(parse_rat(s)?)),
        ScalarDoc::Coeffs(map) => coeffs_to_scalar(map, lam),
    }
}

fn length_to_doc(l: &EdgeLength) -> LengthDoc {
    match l {
        EdgeLength::Infinite => LengthDoc::Plain("inf".into()),
        EdgeLength::Finite(s) => match scalar_to_doc(s) {
            ScalarDoc::Plain(p) => LengthDoc::Plain(p),
            ScalarDoc::Coeffs(c) => LengthDoc::Coeffs(c),
        },
    }
}

fn length_from_doc(doc: &LengthDoc, lam: &ParsedLambda) -> Result<EdgeLength> {
    match doc {
        LengthDoc::Plain(s) if s == "inf" => Ok(EdgeLength::Infinite),
        LengthDoc::Plain(s) => Ok(EdgeLength::Finite(LambdaScalar::from_rat(parse_rat(s)?))),
        LengthDoc::Coeffs(map) => Ok(EdgeLength::Finite(coeffs_to_scalar(map, lam)?)),
    }
}

fn parse_bigint(s: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| Error::Parse {
        message: format!("invalid integer {s:?}"),
    })
}

/// Render a generator's decimal enclosure exactly: the midpoint always
/// has denominator `10^digits`, so the digit string is recovered, not
/// rounded.
fn format_enclosure(g: &Generator) -> String {
    let scale = BigInt::from(10u32).pow(g.digits);
    let scaled = &g.midpoint * BigRational::from_integer(scale);
    assert!(
        scaled.denom().is_one(),
        "enclosure midpoint must have power-of-ten denominator"
    );
    let neg = scaled.numer().is_negative();
    let digits = g.digits as usize;
    let mut abs = scaled.numer().abs().to_string();
    if digits == 0 {
        return scaled.numer().to_string();
    }
    if abs.len() <= digits {
        abs = format!("{}{}", "0".repeat(digits + 1 - abs.len()), abs);
    }
    let split = abs.len() - digits;
    format!("{}{}.{}", if neg { "-" } else { "" }, &abs[..split], &abs[split..])
}

// ---------------------------------------------------------------------
// Graphs.
// ---------------------------------------------------------------------

/// Infinite vertices read off the document shape: on every infinite
/// edge, the endpoint with total degree 1. Fails when an edge leaves
/// that ambiguous or impossible.
fn derive_infinite(doc: &GraphDoc) -> Result<BTreeSet<usize>> {
    let mut degree: BTreeMap<usize, usize> = doc.vertices.iter().map(|&v| (v, 0)).collect();
    for e in &doc.edges {
        for end in [e.u, e.v] {
            if let Some(d) = degree.get_mut(&end) {
                *d += 1;
            }
        }
    }
    let mut inf = BTreeSet::new();
    for e in &doc.edges {
        if e.length.as_deref() != Some("inf") {
            continue;
        }
        let u1 = degree.get(&e.u) == Some(&1);
        let v1 = degree.get(&e.v) == Some(&1);
        match (u1, v1) {
            (true, false) => {
                inf.insert(e.u);
            }
            (false, true) => {
                inf.insert(e.v);
            }
            (true, true) => {
                return Err(Error::Schema {
                    message: format!(
                        "edge {} is infinite but both endpoints are leaves; declare infinite_vertices",
                        e.id
                    ),
                });
            }
            (false, false) => {
                return Err(Error::Schema {
                    message: format!("edge {} is infinite but has no degree-1 endpoint", e.id),
                });
            }
        }
    }
    Ok(inf)
}

/// Build the generator table, folding exact-valued generators into
/// rational constants (the scalar model requires the kept generators to
/// be irrational, hence ℚ-independent of 1). An exact value must lie
/// inside its own declared enclosure.
fn parse_lambda(doc: Option<&LambdaDoc>) -> Result<ParsedLambda> {
    let Some(doc) = doc else {
        return Ok(ParsedLambda::rationals());
    };
    let mut labels = BTreeSet::new();
    for g in &doc.generators {
        if !labels.insert(g.label.clone()) {
            return Err(Error::Schema {
                message: format!("duplicate generator label {:?}", g.label),
            });
        }
    }
    let mut gens = Vec::new();
    let mut folded = BTreeMap::new();
    for g in &doc.generators {
        let parsed = Generator::from_decimal(&g.label, &g.enclosure)?;
        match &g.exact {
            None => gens.push(parsed),
            Some(text) => {
                let value = parse_rat(text)?;
                let radius = BigRational::new(1.into(), BigInt::from(10u32).pow(parsed.digits));
                if (&value - &parsed.midpoint).abs() > radius {
                    return Err(Error::Schema {
                        message: format!(
                            "generator {:?} has exact value {} outside its enclosure {}",
                            g.label, text, g.enclosure
                        ),
                    });
                }
                folded.insert(g.label.clone(), value);
            }
        }
    }
    Ok(ParsedLambda {
        ctx: LambdaContext::new(gens)?,
        folded,
    })
}

fn graph_from_doc(doc: &GraphDoc) -> Result<(MetricGraph, ParsedLambda)> {
    let lam = parse_lambda(doc.lambda.as_ref())?;

    let mut vertices: BTreeMap<usize, VertexKind> = BTreeMap::new();
    for &v in &doc.vertices {
        if vertices.insert(v, VertexKind::Finite).is_some() {
            return Err(Error::Schema {
                message: format!("duplicate vertex id {v}"),
            });
        }
    }
    let infinite = match &doc.infinite_vertices {
        Some(list) => list.iter().copied().collect(),
        None => derive_infinite(doc)?,
    };
    for &v in &infinite {
        match vertices.get_mut(&v) {
            Some(kind) => *kind = VertexKind::Infinite,
            None => {
                return Err(Error::Schema {
                    message: format!("infinite_vertices names unknown vertex {v}"),
                });
            }
        }
    }

    let side = doc
        .lambda
        .as_ref()
        .and_then(|l| l.lengths_in_lambda.as_ref());
    let mut side_used: BTreeSet<&String> = BTreeSet::new();
    let mut edges: BTreeMap<usize, Edge> = BTreeMap::new();
    for e in &doc.edges {
        let side_entry = side.and_then(|m| {
            m.iter()
                .find(|(k, _)| k.parse::<usize>() == Ok(e.id))
                .map(|(k, v)| (k, v))
        });
        let length = match (&e.length, side_entry) {
            (Some(_), Some(_)) => {
                return Err(Error::Schema {
                    message: format!("edge {} declares two lengths", e.id),
                });
            }
            (None, None) => {
                return Err(Error::Schema {
                    message: format!("edge {} has no length", e.id),
                });
            }
            (Some(text), None) => {
                if text == "inf" {
                    EdgeLength::Infinite
                } else {
                    EdgeLength::Finite(LambdaScalar::from_rat(parse_rat(text)?))
                }
            }
            (None, Some((key, map))) => {
                side_used.insert(key);
                EdgeLength::Finite(coeffs_to_scalar(map, &lam)?)
            }
        };
        let prev = edges.insert(
            e.id,
            Edge {
                u: e.u,
                v: e.v,
                length,
            },
        );
        if prev.is_some() {
            return Err(Error::Schema {
                message: format!("duplicate edge id {}", e.id),
            });
        }
    }
    if let Some(side) = side {
        for key in side.keys() {
            if !side_used.contains(key) {
                return Err(Error::Schema {
                    message: format!("lengths_in_lambda names unknown edge {key:?}"),
                });
            }
        }
    }

    let g = MetricGraph::from_parts(vertices, edges);
    g.validate()?;
    Ok((g, lam))
}

fn graph_to_doc(g: &MetricGraph) -> GraphDoc {
    let vertices: Vec<usize> = g.vertex_ids().collect();
    let mut edges = Vec::new();
    let mut side: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut ctx: Option<Arc<LambdaContext>> = None;
    for id in g.edge_ids() {
        let e = g.edge(id).unwrap();
        let length = match &e.length {
            EdgeLength::Infinite => Some("inf".to_string()),
            EdgeLength::Finite(l) if l.is_rational() => Some(format_rat(l.rat_part())),
            EdgeLength::Finite(l) => {
                let map = l
                    .to_label_map()
                    .iter()
                    .map(|(lab, c)| (lab.clone(), format_rat(c)))
                    .collect();
                side.insert(id.to_string(), map);
                let c = l.context().expect("irrational scalar has a context");
                match &ctx {
                    None => ctx = Some(Arc::clone(c)),
                    Some(seen) => assert_eq!(seen, c, "one value group per graph"),
                }
                None
            }
        };
        edges.push(EdgeDoc {
            id,
            u: e.u,
            v: e.v,
            length,
        });
    }
    let lambda = ctx.map(|ctx| LambdaDoc {
        generators: (0..ctx.len() as u32)
            .map(|i| {
                let g = ctx.generator(i);
                GeneratorDoc {
                    label: g.label.clone(),
                    enclosure: format_enclosure(g),
                    exact: None,
                }
            })
            .collect(),
        lengths_in_lambda: Some(side),
    });
    let mut doc = GraphDoc {
        vertices,
        infinite_vertices: None,
        edges,
        lambda,
    };
    // Mark infinite endpoints explicitly only when degrees cannot tell.
    let actual: BTreeSet<usize> = g
        .vertex_ids()
        .filter(|&v| g.vertex_kind(v) == Some(VertexKind::Infinite))
        .collect();
    if derive_infinite(&doc).ok().as_ref() != Some(&actual) {
        doc.infinite_vertices = Some(actual.into_iter().collect());
    }
    doc
}

/// Parse a metric-graph document.
pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        message: e.to_string(),
    })?;
    Ok(graph_from_doc(&doc)?.0)
}

/// Canonical JSON for a metric graph.
pub fn emit_graph(g: &MetricGraph) -> String {
    let mut text =
        serde_json::to_string_pretty(&graph_to_doc(g)).expect("graph document serializes");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------
// Embedding documents.
// ---------------------------------------------------------------------

fn move_to_doc(m: &Move) -> MoveDoc {
    match m {
        Move::Subdivide { edge, lengths } => MoveDoc::Subdivide {
            edge: *edge,
            lengths: (length_to_doc(&lengths.0), length_to_doc(&lengths.1)),
        },
        Move::ReverseSubdivide { vertex } => MoveDoc::ReverseSubdivide { vertex: *vertex },
        Move::AddInfiniteLeaf { vertex } => MoveDoc::AddInfiniteLeaf { vertex: *vertex },
    }
}

fn move_from_doc(doc: &MoveDoc, lam: &ParsedLambda) -> Result<Move> {
    Ok(match doc {
        MoveDoc::Subdivide { edge, lengths } => Move::Subdivide {
            edge: *edge,
            lengths: (
                length_from_doc(&lengths.0, lam)?,
                length_from_doc(&lengths.1, lam)?,
            ),
        },
        MoveDoc::ReverseSubdivide { vertex } => Move::ReverseSubdivide { vertex: *vertex },
        MoveDoc::AddInfiniteLeaf { vertex } => Move::AddInfiniteLeaf { vertex: *vertex },
    })
}

fn complex_to_doc(c: &Complex) -> ComplexDoc {
    ComplexDoc {
        vertices: c
            .vertices
            .iter()
            .map(|p| PointDoc {
                x: scalar_to_doc(&p.x),
                y: scalar_to_doc(&p.y),
            })
            .collect(),
        segments: c
            .segments
            .iter()
            .map(|s| SegmentDoc {
                a: s.a,
                b: s.b,
                weight: s.weight.to_string(),
            })
            .collect(),
        rays: c
            .rays
            .iter()
            .map(|r| RayDoc {
                apex: r.apex,
                dir: [r.dir.m.to_string(), r.dir.n.to_string()],
                weight: r.weight.to_string(),
            })
            .collect(),
    }
}

fn complex_from_doc(doc: &ComplexDoc, lam: &ParsedLambda) -> Result<Complex> {
    let mut c = Complex::default();
    for p in &doc.vertices {
        c.vertices.push(Point::new(
            scalar_from_doc(&p.x, lam)?,
            scalar_from_doc(&p.y, lam)?,
        ));
    }
    for s in &doc.segments {
        c.segments.push(Segment {
            a: s.a,
            b: s.b,
            weight: parse_bigint(&s.weight)?,
        });
    }
    for r in &doc.rays {
        c.rays.push(Ray {
            apex: r.apex,
            dir: PrimitiveVector::from_bigints(parse_bigint(&r.dir[0])?, parse_bigint(&r.dir[1])?)?,
            weight: parse_bigint(&r.weight)?,
        });
    }
    Ok(c)
}

fn report_category(name: &str) -> Result<&'static str> {
    for known in [
        "schema",
        "geometry",
        "crossings",
        "balanced",
        "isometric",
        "weights",
        "lambda",
    ] {
        if name == known {
            return Ok(known);
        }
    }
    Err(Error::Parse {
        message: format!("unknown report category {name:?}"),
    })
}

/// Canonical JSON for an embedding: input graph, modification trace,
/// embedded graph, complex, edge-image map, and the report. `original`
/// is the graph the embedding was built from; it travels with the
/// document so the independent verifier can replay the trace against
/// it.
pub fn emit_complex(
    complex: &Complex,
    map: &EmbeddingMap,
    report: &Report,
    original: &MetricGraph,
) -> String {
    let doc = EmbeddingDoc {
        input: graph_to_doc(original),
        trace: map.trace.moves.iter().map(move_to_doc).collect(),
        graph: graph_to_doc(&map.graph),
        complex: complex_to_doc(complex),
        map: MapDoc {
            vertex_image: map
                .vertex_image
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            edge_images: map
                .edge_images
                .iter()
                .map(|(k, v)| {
                    let img = match v {
                        EdgeImage::Chain { segments } => EdgeImageDoc::Chain {
                            chain: segments.clone(),
                        },
                        EdgeImage::Ray { ray } => EdgeImageDoc::Ray { ray: *ray },
                    };
                    (k.to_string(), img)
                })
                .collect(),
            claimed_crossings: map.claimed_crossings,
            crossings_exact: map.crossings_exact,
            lambda_mode: map.lambda_mode,
        },
        report: ReportDoc {
            balanced: report.balanced,
            isometric: report.isometric,
            crossings_on_gamma: report.crossings_on_gamma,
            crossings_exact: report.crossings_exact,
            ray_crossings: report.ray_crossings,
            unit_weights: report.unit_weights,
            lambda_certified: report.lambda_certified,
            geometry_valid: report.geometry_valid,
            entries: report
                .entries
                .iter()
                .map(|e| EntryDoc {
                    category: e.category.into(),
                    pass: e.pass,
                    detail: e.detail.clone(),
                })
                .collect(),
        },
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("embedding document serializes");
    text.push('\n');
    text
}

fn parse_index_key(key: &str) -> Result<usize> {
    key.parse().map_err(|_| Error::Parse {
        message: format!("invalid id key {key:?}"),
    })
}

/// Parse an embedding document back into its exact parts.
pub fn parse_complex(text: &str) -> Result<EmbeddingDocument> {
    let doc: EmbeddingDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
        message: e.to_string(),
    })?;
    let (original, lam) = graph_from_doc(&doc.input)?;
    let (graph, _) = graph_from_doc(&doc.graph)?;
    let trace = ModificationTrace {
        moves: doc
            .trace
            .iter()
            .map(|m| move_from_doc(m, &lam))
            .collect::<Result<_>>()?,
    };
    let complex = complex_from_doc(&doc.complex, &lam)?;
    let mut vertex_image = BTreeMap::new();
    for (k, v) in &doc.map.vertex_image {
        vertex_image.insert(parse_index_key(k)?, *v);
    }
    let mut edge_images = BTreeMap::new();
    for (k, v) in &doc.map.edge_images {
        let img = match v {
            EdgeImageDoc::Chain { chain } => EdgeImage::Chain {
                segments: chain.clone(),
            },
            EdgeImageDoc::Ray { ray } => EdgeImage::Ray { ray: *ray },
        };
        edge_images.insert(parse_index_key(k)?, img);
    }
    let map = EmbeddingMap {
        graph,
        trace,
        vertex_image,
        edge_images,
        claimed_crossings: doc.map.claimed_crossings,
        crossings_exact: doc.map.crossings_exact,
        lambda_mode: doc.map.lambda_mode,
    };
    let report = Report {
        balanced: doc.report.balanced,
        isometric: doc.report.isometric,
        crossings_on_gamma: doc.report.crossings_on_gamma,
        crossings_exact: doc.report.crossings_exact,
        ray_crossings: doc.report.ray_crossings,
        unit_weights: doc.report.unit_weights,
        lambda_certified: doc.report.lambda_certified,
        geometry_valid: doc.report.geometry_valid,
        entries: doc
            .report
            .entries
            .iter()
            .map(|e| {
                Ok(CheckEntry {
                    category: report_category(&e.category)?,
                    pass: e.pass,
                    detail: e.detail.clone(),
                })
            })
            .collect::<Result<_>>()?,
    };
    Ok(EmbeddingDocument {
        complex,
        map,
        original,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{embed_isometric, EmbedOptions, Mode};
    use crate::rat::rat;
    use crate::verify::verify;

    fn triangle_text() -> String {
        r#"{
            "vertices": [0, 1, 2],
            "edges": [
                {"id": 0, "u": 0, "v": 1, "length": "1"},
                {"id": 1, "u": 1, "v": 2, "length": "1"},
                {"id": 2, "u": 2, "v": 0, "length": "1"}
            ]
        }"#
        .into()
    }

    #[test]
    fn triangle_file_parses() {
        let g = parse_graph(&triangle_text()).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        for e in g.edge_ids() {
            assert_eq!(
                g.edge(e).unwrap().length.finite().unwrap(),
                &LambdaScalar::one()
            );
        }
    }

    #[test]
    fn rational_lengths_are_exact() {
        let text = r#"{
            "vertices": [0, 1],
            "edges": [{"id": 0, "u": 0, "v": 1, "length": "10/3"}]
        }"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(
            g.edge(0).unwrap().length.finite().unwrap(),
            &LambdaScalar::from_rat(rat(10, 3))
        );
    }

    #[test]
    fn infinite_edge_needs_a_leaf_endpoint() {
        let text = r#"{
            "vertices": [0, 1, 2],
            "edges": [
                {"id": 0, "u": 0, "v": 1, "length": "1"},
                {"id": 1, "u": 1, "v": 2, "length": "1"},
                {"id": 2, "u": 2, "v": 0, "length": "1"},
                {"id": 3, "u": 0, "v": 1, "length": "inf"}
            ]
        }"#;
        match parse_graph(text) {
            Err(Error::Schema { message }) => assert!(message.contains("degree-1")),
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn lone_infinite_edge_is_ambiguous() {
        let text = r#"{
            "vertices": [0, 1],
            "edges": [{"id": 0, "u": 0, "v": 1, "length": "inf"}]
        }"#;
        match parse_graph(text) {
            Err(Error::Schema { message }) => assert!(message.contains("infinite_vertices")),
            other => panic!("expected a schema error, got {other:?}"),
        }
        // The explicit marker resolves it.
        let text = r#"{
            "vertices": [0, 1],
            "infinite_vertices": [1],
            "edges": [{"id": 0, "u": 0, "v": 1, "length": "inf"}]
        }"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(g.vertex_kind(1), Some(VertexKind::Infinite));
    }

    #[test]
    fn exact_generators_fold_to_rationals() {
        let text = r#"{
            "vertices": [0, 1],
            "edges": [{"id": 0, "u": 0, "v": 1}],
            "lambda": {
                "generators": [{"label": "h", "enclosure": "1.5", "exact": "3/2"}],
                "lengths_in_lambda": {"0": {"1": "1", "h": "2"}}
            }
        }"#;
        let g = parse_graph(text).unwrap();
        // 1 + 2·(3/2) = 4, a plain rational.
        assert_eq!(
            g.edge(0).unwrap().length.finite().unwrap(),
            &LambdaScalar::from_int(4)
        );

        let bad = text.replace("\"3/2\"", "\"7/2\"");
        match parse_graph(&bad) {
            Err(Error::Schema { message }) => assert!(message.contains("enclosure")),
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn enclosure_strings_round_trip() {
        for text in ["1.41421356237309504880168872420969807857", "-0.25", "3", "0.5000"] {
            let g = Generator::from_decimal("g", text).unwrap();
            assert_eq!(format_enclosure(&g), text);
        }
    }

    fn lambda_graph() -> (MetricGraph, Arc<LambdaContext>) {
        let ctx = LambdaContext::new(vec![
            Generator::from_decimal("sqrt2", "1.41421356237309504880168872420969807857").unwrap(),
        ])
        .unwrap();
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(a, b, LambdaScalar::one()).unwrap();
        g.add_edge(b, c, LambdaScalar::one()).unwrap();
        g.add_edge(c, a, LambdaScalar::generator(&ctx, 0)).unwrap();
        (g, ctx)
    }

    #[test]
    fn graph_emission_is_a_fixed_point_of_parsing() {
        let (g, _) = lambda_graph();
        let (g, _) = g.add_infinite_leaf(0).unwrap();
        let text = emit_graph(&g);
        let reparsed = parse_graph(&text).unwrap();
        assert_eq!(emit_graph(&reparsed), text);
        assert_eq!(reparsed, g);
    }

    #[test]
    fn embedding_document_round_trips_and_reverifies() {
        let mut g = MetricGraph::new();
        let a = g.add_vertex();
        let b = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(a, b, LambdaScalar::one()).unwrap();
        g.add_edge(b, c, LambdaScalar::one()).unwrap();
        g.add_edge(c, a, LambdaScalar::one()).unwrap();
        let (complex, map, report) = embed_isometric(&g, &EmbedOptions::default()).unwrap();
        assert!(report.all_pass());

        let text = emit_complex(&complex, &map, &report, &g);
        let doc = parse_complex(&text).unwrap();
        assert_eq!(
            emit_complex(&doc.complex, &doc.map, &doc.report, &doc.original),
            text
        );
        assert_eq!(doc.complex, complex);
        assert_eq!(doc.original, g);
        assert_eq!(doc.map.vertex_image, map.vertex_image);
        assert_eq!(doc.map.edge_images, map.edge_images);

        // The reparsed document re-certifies from scratch.
        let fresh = verify(&doc.complex, &doc.map, &doc.original);
        assert!(fresh.all_pass(), "{:?}", fresh.failures());
    }

    #[test]
    fn value_group_document_round_trips() {
        let (g, _) = lambda_graph();
        let opts = EmbedOptions {
            mode: Mode::Lambda,
            ..EmbedOptions::default()
        };
        let (complex, map, report) = embed_isometric(&g, &opts).unwrap();
        assert!(report.all_pass());

        let text = emit_complex(&complex, &map, &report, &g);
        let doc = parse_complex(&text).unwrap();
        assert_eq!(
            emit_complex(&doc.complex, &doc.map, &doc.report, &doc.original),
            text
        );
        assert_eq!(doc.complex, complex);
        let fresh = verify(&doc.complex, &doc.map, &doc.original);
        assert!(fresh.all_pass(), "{:?}", fresh.failures());
        assert_eq!(fresh.lambda_certified, Some(true));
    }
}
