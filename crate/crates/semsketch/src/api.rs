//! The `/v1` HTTP/JSON API.
//!
//! Every handler is a pure function of the loaded store and the request.
//! Errors are JSON bodies of the form `{"error": CODE, "message": TEXT}`.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::rejection::{PathRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tower_http::cors::{Any, CorsLayer};

use semsketch_core::model::{Lexeme, Measure};
use semsketch_core::store::{read_manifest, Manifest, QueryError, SketchStore, StoreError};

/// A loaded store plus its manifest, shared by all requests.
#[derive(Debug)]
pub struct Service {
    pub store: SketchStore,
    pub manifest: Manifest,
}

impl Service {
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        let manifest = read_manifest(root)?;
        let store = SketchStore::open(root)?;
        Ok(Service { store, manifest })
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    message: &'a str,
}

impl ApiError {
    fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            code: "E_NOT_FOUND",
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "E_BAD_REQUEST",
            message: message.into(),
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let status = match &e {
            QueryError::NotFound(_) => StatusCode::NOT_FOUND,
            QueryError::BadRequest(_) => StatusCode::BAD_REQUEST,
            // a class with no sketch on one side has nothing to report
            QueryError::Contrast(_) => StatusCode::NOT_FOUND,
            QueryError::Sketch(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(e: PathRejection) -> Self {
        ApiError::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code,
            message: &self.message,
        };
        (self.status, Json(body)).into_response()
    }
}

type Shared = State<Arc<Service>>;
type Params = Result<Query<HashMap<String, String>>, QueryRejection>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn params(p: Params) -> Result<HashMap<String, String>, ApiError> {
    Ok(p?.0)
}

fn number(p: &HashMap<String, String>, key: &str) -> Result<Option<usize>, ApiError> {
    p.get(key)
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| ApiError::bad_request(format!("`{key}` must be a non-negative integer, got `{v}`")))
        })
        .transpose()
}

fn measure(p: &HashMap<String, String>) -> Result<Option<Measure>, ApiError> {
    p.get("measure")
        .map(|v| v.parse::<Measure>().map_err(ApiError::bad_request))
        .transpose()
}

#[derive(Serialize)]
struct Languages {
    languages: Vec<String>,
}

async fn languages(State(svc): Shared) -> Json<Languages> {
    Json(Languages {
        languages: svc.store.languages(),
    })
}

#[derive(Serialize)]
struct Lexemes<'a> {
    lexemes: Vec<&'a Lexeme>,
}

async fn lexemes(State(svc): Shared, q: Params) -> Response {
    let q = match params(q) {
        Ok(q) => q,
        Err(e) => return e.into_response(),
    };
    let prefix = q.get("prefix").map(String::as_str).unwrap_or("");
    let body = Lexemes {
        lexemes: svc.store.lexemes(q.get("lang").map(String::as_str), prefix),
    };
    Json(body).into_response()
}

async fn sketch(
    State(svc): Shared,
    path: Result<UrlPath<(String, String, String)>, PathRejection>,
    q: Params,
) -> ApiResult<semsketch_core::sketch::Sketch> {
    let UrlPath((lang, lemma, class)) = path?;
    let q = params(q)?;
    let lex = Lexeme::new(&lang, &lemma, &class);
    Ok(Json(svc.store.sketch(&lex, number(&q, "top")?, measure(&q)?)?))
}

async fn slot(
    State(svc): Shared,
    path: Result<UrlPath<(String, String, String, String)>, PathRejection>,
    q: Params,
) -> ApiResult<semsketch_core::store::SlotPage> {
    let UrlPath((lang, lemma, class, role)) = path?;
    let q = params(q)?;
    let lex = Lexeme::new(&lang, &lemma, &class);
    let offset = number(&q, "offset")?.unwrap_or(0);
    let limit = number(&q, "limit")?.unwrap_or(svc.store.set().config.top_fillers);
    Ok(Json(svc.store.slot_page(&lex, &role, offset, limit, measure(&q)?)?))
}

#[derive(Serialize)]
struct Pairs<'a> {
    pairs: Vec<&'a semsketch_core::contrastive::PairDiff>,
}

async fn pairs(State(svc): Shared, q: Params) -> Response {
    match params(q) {
        Ok(q) => Json(Pairs {
            pairs: svc.store.pairs(q.get("semclass").map(String::as_str)),
        })
        .into_response(),
        Err(e) => e.into_response(),
    }
}

type PairPath = (String, String, String, String, String, String);

async fn pair_diff(
    State(svc): Shared,
    path: Result<UrlPath<PairPath>, PathRejection>,
) -> ApiResult<semsketch_core::contrastive::PairDiff> {
    let UrlPath((ll, lle, lc, rl, rle, rc)) = path?;
    let left = Lexeme::new(&ll, &lle, &lc);
    let right = Lexeme::new(&rl, &rle, &rc);
    Ok(Json(svc.store.pair_diff(&left, &right)?))
}

async fn class_report(
    State(svc): Shared,
    path: Result<UrlPath<String>, PathRejection>,
    q: Params,
) -> ApiResult<semsketch_core::contrastive::FieldReport> {
    let UrlPath(name) = path?;
    let q = params(q)?;
    let role = q
        .get("role")
        .map(String::as_str)
        .unwrap_or(semsketch_core::contrastive::DEFAULT_FIELD_ROLE);
    Ok(Json(svc.store.class_report(&name, role, number(&q, "depth")?)?))
}

async fn manifest(State(svc): Shared) -> Json<Manifest> {
    Json(svc.manifest.clone())
}

async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

/// Builds the `/v1` router over a loaded service.
pub fn router(service: Arc<Service>) -> Router {
    let cors = CorsLayer::new()
        .allow_origin(Any)
        .allow_methods([Method::GET, Method::HEAD]);
    Router::new()
        .route("/v1/languages", get(languages))
        .route("/v1/lexemes", get(lexemes))
        .route("/v1/sketch/:lang/:lemma/:semclass", get(sketch))
        .route("/v1/sketch/:lang/:lemma/:semclass/slot/:role", get(slot))
        .route("/v1/pairs", get(pairs))
        .route(
            "/v1/pair/:l_lang/:l_lemma/:l_class/:r_lang/:r_lemma/:r_class/diff",
            get(pair_diff),
        )
        .route("/v1/classes/:name/report", get(class_report))
        .route("/v1/manifest", get(manifest))
        .fallback(fallback)
        .layer(cors)
        .with_state(service)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(service: Arc<Service>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
