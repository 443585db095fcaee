#![allow(dead_code)]

//! Minimal HTTP/1.1 server answering chat-completion requests from a script.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

#[derive(Debug, Clone)]
pub enum Reply {
    /// 200 with this string as the message content.
    Content(String),
    Status(u16),
    /// 200 with a body that is not a chat-completion response.
    Garbage,
    /// Hold the connection open this long before answering with content.
    Delay(Duration, String),
}

#[derive(Debug, Clone)]
pub struct Request {
    pub path: String,
    pub authorization: Option<String>,
    pub body: serde_json::Value,
}

#[derive(Clone)]
pub struct Stub {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
    pub peak_in_flight: Arc<AtomicUsize>,
}

impl Stub {
    pub fn hits(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

/// Serves the `k`-th request with `script[k]`, repeating the last entry.
pub fn spawn(script: Vec<Reply>) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let stub = Stub {
        url,
        requests: Arc::new(Mutex::new(Vec::new())),
        peak_in_flight: Arc::new(AtomicUsize::new(0)),
    };
    let served = stub.clone();
    let live = Arc::new(AtomicUsize::new(0));
    thread::spawn(move || {
        for conn in listener.incoming() {
            let Ok(conn) = conn else { continue };
            let (stub, script, live) = (served.clone(), script.clone(), live.clone());
            thread::spawn(move || {
                let now = live.fetch_add(1, Ordering::SeqCst) + 1;
                stub.peak_in_flight.fetch_max(now, Ordering::SeqCst);
                let _ = handle(conn, &stub, &script, &live);
            });
        }
    });
    stub
}

/// `live` is released before the response goes out, so a client that has
/// seen its reply can never overlap with the request it completed.
fn handle(
    conn: TcpStream,
    stub: &Stub,
    script: &[Reply],
    live: &AtomicUsize,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(conn.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let path = line.split_whitespace().nth(1).unwrap_or("").to_string();
    let (mut length, mut authorization) = (0, None);
    loop {
        line.clear();
        reader.read_line(&mut line)?;
        let header = line.trim_end();
        if header.is_empty() {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            match name.to_ascii_lowercase().as_str() {
                "content-length" => length = value.trim().parse().unwrap_or(0),
                "authorization" => authorization = Some(value.trim().to_string()),
                _ => {}
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body)?;
    let index = {
        let mut reqs = stub.requests.lock().unwrap();
        reqs.push(Request {
            path,
            authorization,
            body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
        });
        reqs.len() - 1
    };
    let reply = script[index.min(script.len() - 1)].clone();
    let (status, payload) = match reply {
        Reply::Content(c) => (200, completion(&c)),
        Reply::Status(s) => (s, "{\"error\":\"scripted\"}".to_string()),
        Reply::Garbage => (200, "not json".to_string()),
        Reply::Delay(wait, c) => {
            thread::sleep(wait);
            (200, completion(&c))
        }
    };
    live.fetch_sub(1, Ordering::SeqCst);
    let mut conn = conn;
    write!(
        conn,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    )?;
    conn.flush()
}

fn completion(content: &str) -> String {
    serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]
    })
    .to_string()
}
