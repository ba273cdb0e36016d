use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub errors: Vec<FieldError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_samples: Option<usize>,
}

#[derive(Debug)]
pub enum ApiError {
    Invalid(Vec<FieldError>),
    TooLarge { requested: usize, cap: usize },
    Internal(String),
}

impl ApiError {
    pub fn field(field: &str, reason: impl Into<String>) -> Self {
        ApiError::Invalid(vec![FieldError {
            field: field.to_string(),
            reason: reason.into(),
        }])
    }
}

impl From<moonlab_core::Error> for ApiError {
    fn from(e: moonlab_core::Error) -> Self {
        use moonlab_core::Error as E;
        let reason = e.to_string();
        match e {
            E::Architecture { n: 0, .. } => ApiError::field("n", reason),
            E::Architecture { .. } => ApiError::field("m", reason),
            E::Domain { name, .. } => ApiError::field(name, reason),
            E::Config { field, .. } => ApiError::field(field, reason),
            E::TooFewSamples { .. } => ApiError::field("samples", reason),
            E::Unsupported(_) => ApiError::field("quadrature", reason),
            E::TooLarge { requested, limit } => ApiError::TooLarge { requested, cap: limit },
            _ => ApiError::Internal(reason),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::Invalid(errors) => (
                StatusCode::UNPROCESSABLE_ENTITY,
                ErrorBody {
                    error: "validation",
                    errors,
                    max_samples: None,
                },
            ),
            ApiError::TooLarge { requested, cap } => (
                StatusCode::PAYLOAD_TOO_LARGE,
                ErrorBody {
                    error: "too_large",
                    errors: vec![FieldError {
                        field: "samples".into(),
                        reason: format!("{requested} exceeds the maximum of {cap}"),
                    }],
                    max_samples: Some(cap),
                },
            ),
            ApiError::Internal(reason) => (
                StatusCode::INTERNAL_SERVER_ERROR,
                ErrorBody {
                    error: "internal",
                    errors: vec![FieldError {
                        field: String::new(),
                        reason,
                    }],
                    max_samples: None,
                },
            ),
        };
        (status, Json(body)).into_response()
    }
}
