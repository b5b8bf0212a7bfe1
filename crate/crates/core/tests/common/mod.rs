//! Local chat-completions stand-in for the LLM tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Seen {
    pub authorization: Option<String>,
    pub body: Value,
}

/// Answers from a queue of `(status, content)` pairs. Status 200 wraps the
/// content in a completion object, anything else sends it raw. An empty
/// queue answers 500.
#[derive(Default)]
pub struct MockLlm {
    replies: Mutex<VecDeque<(u16, String)>>,
    seen: Mutex<Vec<Seen>>,
}

impl MockLlm {
    pub fn with_replies<I, S>(replies: I) -> Arc<Self>
    where
        I: IntoIterator<Item = (u16, S)>,
        S: Into<String>,
    {
        Arc::new(Self {
            replies: Mutex::new(replies.into_iter().map(|(s, c)| (s, c.into())).collect()),
            seen: Mutex::default(),
        })
    }

    pub fn seen(&self) -> Vec<Seen> {
        self.seen.lock().unwrap().clone()
    }
}

async fn complete(
    State(mock): State<Arc<MockLlm>>,
    headers: HeaderMap,
    Json(body): Json<Value>,
) -> (StatusCode, String) {
    mock.seen.lock().unwrap().push(Seen {
        authorization: headers
            .get("authorization")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string),
        body,
    });
    let next = mock.replies.lock().unwrap().pop_front();
    match next {
        Some((200, content)) => {
            let reply = json!({
                "id": "mock",
                "object": "chat.completion",
                "choices": [{"index": 0, "message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
            });
            (StatusCode::OK, reply.to_string())
        }
        Some((status, text)) => (StatusCode::from_u16(status).unwrap(), text),
        None => (StatusCode::INTERNAL_SERVER_ERROR, "script exhausted".into()),
    }
}

/// Serves `mock` on an ephemeral port; returns the API base URL
/// (requests go to `<base>/chat/completions`).
pub fn serve(mock: Arc<MockLlm>) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(1)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            let app = Router::new()
                .route("/v1/chat/completions", post(complete))
                .with_state(mock);
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}/v1", rx.recv().unwrap())
}
