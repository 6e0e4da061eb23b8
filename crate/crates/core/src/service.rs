//! HTTP retrieval service.
//!
//! Serves stored articles at `/BioC_{xml|json}/{PMID or PMCID}/{unicode|ascii}`,
//! optionally under the `/research/bionlp/RESTful/pmcoa.cgi` prefix. Each
//! response is a one-document collection.

use std::future::Future;
use std::str::FromStr;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, StatusCode, Uri};
use axum::response::Response;
use axum::Router;
use tokio::net::TcpListener;

use crate::model::{Collection, Document, DEFAULT_SEPARATOR};
use crate::serial::SerializationFormat;
use crate::store::{IdError, Store, StoreError, COLLECTION_KEY, COLLECTION_SOURCE};
use crate::translit::{Encoding, TranslitTable};

/// Path prefix of the public PMC BioC web API.
pub const PMCOA_PREFIX: &str = "/research/bionlp/RESTful/pmcoa.cgi";
pub const HEALTH_PATH: &str = "/healthz";
pub const TEXT_PLAIN: &str = "text/plain; charset=utf-8";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiRequest {
    pub format: SerializationFormat,
    /// Raw PMID or PMCID, before resolution.
    pub id: String,
    pub encoding: Encoding,
}

/// Why a path is not a valid API request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RouteError {
    /// Not an API path at all.
    NoRoute,
    BadSegment(String),
}

impl FromStr for ApiRequest {
    type Err = RouteError;

    fn from_str(path: &str) -> Result<Self, Self::Err> {
        let path = path.split(['?', '#']).next().unwrap_or_default();
        let path = path.strip_prefix(PMCOA_PREFIX).unwrap_or(path);
        let segments: Vec<&str> = path.trim_start_matches('/').split('/').collect();
        let [format, id, encoding] = segments.as_slice() else {
            return Err(RouteError::NoRoute);
        };
        let format = format.strip_prefix("BioC_").ok_or(RouteError::NoRoute)?;
        Ok(ApiRequest {
            format: format.parse().map_err(RouteError::BadSegment)?,
            id: id.to_string(),
            encoding: encoding.parse().map_err(RouteError::BadSegment)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub content_type: &'static str,
    pub body: Vec<u8>,
}

impl ApiResponse {
    fn text(status: u16, body: impl Into<String>) -> Self {
        Self {
            status,
            content_type: TEXT_PLAIN,
            body: body.into().into_bytes(),
        }
    }

    pub fn body_str(&self) -> &str {
        std::str::from_utf8(&self.body).unwrap_or_default()
    }
}

/// Request handling over a shared store. Never writes to the store.
#[derive(Debug, Clone)]
pub struct Service {
    store: Arc<Store>,
    table: TranslitTable,
}

impl Service {
    pub fn new(store: Arc<Store>) -> Self {
        Self::with_table(store, TranslitTable::default())
    }

    pub fn with_table(store: Arc<Store>, table: TranslitTable) -> Self {
        Self { store, table }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn handle_get(&self, path: &str) -> ApiResponse {
        if path.split('?').next() == Some(HEALTH_PATH) {
            return ApiResponse::text(200, "ok");
        }
        let request = match path.parse::<ApiRequest>() {
            Ok(r) => r,
            Err(RouteError::NoRoute) => return ApiResponse::text(404, format!("no route for {path}")),
            Err(RouteError::BadSegment(reason)) => return ApiResponse::text(400, reason),
        };
        match self.fetch(&request) {
            Ok(body) => ApiResponse {
                status: 200,
                content_type: request.format.content_type(),
                body: body.into_bytes(),
            },
            Err(StoreError::Id(IdError::MalformedId(id))) => {
                ApiResponse::text(400, format!("malformed id {id:?}"))
            }
            Err(e @ (StoreError::Id(IdError::UnknownId(_)) | StoreError::NotFound(_))) => {
                ApiResponse::text(404, e.to_string())
            }
            Err(e) => ApiResponse::text(500, e.to_string()),
        }
    }

    fn fetch(&self, request: &ApiRequest) -> Result<String, StoreError> {
        let mut doc = self.store.get_by_id(&request.id)?;
        if request.encoding == Encoding::Ascii {
            doc = self.table.ascii_document(doc, DEFAULT_SEPARATOR);
        }
        Ok(request.format.serialize(&single_document_collection(doc, today())))
    }
}

/// Current UTC date as `YYYYMMDD`.
pub fn today() -> String {
    chrono::Utc::now().format("%Y%m%d").to_string()
}

/// Wraps one document in a collection with the local source and key.
pub fn single_document_collection(doc: Document, date: impl Into<String>) -> Collection {
    let mut collection = Collection::new(COLLECTION_SOURCE, date, COLLECTION_KEY);
    collection.documents.push(doc);
    collection
}

/// Handles one GET against `store` with the standard table.
pub fn handle_get(store: Arc<Store>, path: &str) -> ApiResponse {
    Service::new(store).handle_get(path)
}

/// Axum router sending every GET through [`Service::handle_get`].
pub fn router(service: Arc<Service>) -> Router {
    Router::new().fallback(move |method: Method, uri: Uri| {
        let service = service.clone();
        async move {
            if method != Method::GET && method != Method::HEAD {
                return into_response(ApiResponse::text(405, "only GET is supported"));
            }
            let path = uri.path_and_query().map_or(uri.path(), |pq| pq.as_str()).to_string();
            let response = tokio::task::spawn_blocking(move || service.handle_get(&path))
                .await
                .unwrap_or_else(|e| ApiResponse::text(500, e.to_string()));
            into_response(response)
        }
    })
}

fn into_response(r: ApiResponse) -> Response {
    Response::builder()
        .status(StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR))
        .header(header::CONTENT_TYPE, r.content_type)
        .body(Body::from(r.body))
        .expect("static headers are valid")
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    service: Arc<Service>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}
