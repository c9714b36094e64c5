//! NVD client against a local one-shot HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use vulnchar::corpus::{NvdClient, NvdError};

const FIXTURE: &str = include_str!("data/nvd_CVE-2017-6725.json");
const LISTING: &str = "A vulnerability in the web framework code of Cisco Prime Infrastructure could allow an \
unauthenticated, remote attacker to conduct a cross-site scripting (XSS) attack against a user of the web \
interface of an affected system. More Information: CSCuw65833 CSCuw65837. Known Affected Releases: 2.2(2).";

/// Serves `responses` in order, one per connection, and reports each
/// request head.
fn serve(responses: Vec<String>) -> (String, mpsc::Receiver<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!(
        "http://{}/rest/json/cves/2.0",
        listener.local_addr().unwrap()
    );
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for response in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
                head.push_str(&line);
            }
            tx.send(head).unwrap();
            stream.write_all(response.as_bytes()).unwrap();
            stream.flush().unwrap();
            let _ = stream.read(&mut [0u8; 1]);
        }
    });
    (url, rx)
}

fn http(status: &str, extra: &str, body: &str) -> String {
    format!(
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n{extra}\r\n{body}",
        body.len()
    )
}

#[test]
fn fetches_listing_description_and_caches_it() {
    let (url, requests) = serve(vec![http("200 OK", "", FIXTURE)]);
    let cache = tempfile::tempdir().unwrap();
    let client = NvdClient::new(cache.path())
        .with_base_url(&url)
        .with_api_key("k-123");

    let record = client.fetch_cve("CVE-2017-6725").unwrap();
    assert_eq!(record.cve_id, "CVE-2017-6725");
    assert_eq!(record.description, LISTING);

    let head = requests.recv().unwrap();
    assert!(
        head.starts_with("GET /rest/json/cves/2.0?cveId=CVE-2017-6725 "),
        "{head}"
    );
    assert!(
        head.to_ascii_lowercase().contains("apikey: k-123"),
        "{head}"
    );

    // served from the cache: the mock accepts no second connection
    assert!(client.cache_path("CVE-2017-6725").exists());
    assert_eq!(client.fetch_cve("CVE-2017-6725").unwrap(), record);
}

#[test]
fn maps_http_failures() {
    let (url, _requests) = serve(vec![
        http("404 Not Found", "", ""),
        http("429 Too Many Requests", "Retry-After: 7\r\n", ""),
        http("500 Internal Server Error", "", ""),
        http("200 OK", "", r#"{"totalResults":0,"vulnerabilities":[]}"#),
        http("200 OK", "", "not json"),
    ]);
    let cache = tempfile::tempdir().unwrap();
    let client = NvdClient::new(cache.path()).with_base_url(&url);
    assert!(matches!(
        client.fetch_cve("CVE-2017-0001"),
        Err(NvdError::NotFound(_))
    ));
    match client.fetch_cve("CVE-2017-0002") {
        Err(NvdError::RateLimited {
            status: 429,
            retry_after,
        }) => {
            assert_eq!(retry_after, Some(std::time::Duration::from_secs(7)))
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        client.fetch_cve("CVE-2017-0003"),
        Err(NvdError::Status(500))
    ));
    assert!(matches!(
        client.fetch_cve("CVE-2017-0004"),
        Err(NvdError::NotFound(_))
    ));
    assert!(matches!(
        client.fetch_cve("CVE-2017-0005"),
        Err(NvdError::Format(_))
    ));
    assert!(!client.cache_path("CVE-2017-0005").exists());
}
