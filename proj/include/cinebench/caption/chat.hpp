#pragma once

// Request/response records exchanged with the LMM client through batch files.
// Each batch file holds one JSON object per line; responses carry the same
// request_id as the request they answer.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cinebench/core/types.hpp"

namespace cinebench::chat {

enum class ResponseSchema { FreeText, RewriteJson, ShotList, MdvlJson };

constexpr std::string_view to_string(ResponseSchema s) noexcept {
  switch (s) {
    case ResponseSchema::FreeText: return "FREE_TEXT";
    case ResponseSchema::RewriteJson: return "REWRITE_JSON";
    case ResponseSchema::ShotList: return "SHOT_LIST";
    case ResponseSchema::MdvlJson: return "MDVL_JSON";
  }
  return "UNKNOWN";
}

inline ResponseSchema schema_from_string(std::string_view s) {
  for (auto v : {ResponseSchema::FreeText, ResponseSchema::RewriteJson, ResponseSchema::ShotList, ResponseSchema::MdvlJson})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::Parse, "unknown expected_schema '" + std::string(s) + "'");
}

struct FrameRef {
  std::string clip_id;
  std::int64_t frame = 0;
  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

struct ChatRequest {
  std::string request_id;
  std::string system_text;
  std::string user_text;
  std::vector<FrameRef> attachments;
  ResponseSchema expected_schema = ResponseSchema::FreeText;
  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

inline ordered_json to_json(const ChatRequest& r) {
  ordered_json att = ordered_json::array();
  for (const auto& a : r.attachments) att.push_back(ordered_json{{"clip_id", a.clip_id}, {"frame", a.frame}});
  return ordered_json{{"request_id", r.request_id},
                      {"system", r.system_text},
                      {"user", r.user_text},
                      {"attachments", std::move(att)},
                      {"expected_schema", std::string(to_string(r.expected_schema))}};
}

inline ChatRequest request_from_json(const ordered_json& j) {
  try {
    ChatRequest r;
    r.request_id = j.at("request_id").get<std::string>();
    r.system_text = j.at("system").get<std::string>();
    r.user_text = j.at("user").get<std::string>();
    for (const auto& a : j.at("attachments")) r.attachments.push_back({a.at("clip_id").get<std::string>(), a.at("frame").get<std::int64_t>()});
    r.expected_schema = schema_from_string(j.at("expected_schema").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad request record: ") + e.what());
  }
}

struct ChatResponse {
  std::string request_id;
  bool ok = true;  // false when the client gave up (network error, retries exhausted)
  std::string text;
  friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

inline ChatResponse response_from_json(const ordered_json& j) {
  try {
    ChatResponse r;
    r.request_id = j.at("request_id").get<std::string>();
    const auto status = j.value("status", std::string("OK"));
    r.ok = status == "OK";
    if (j.contains("text") && j.at("text").is_string()) r.text = j.at("text").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("bad response record: ") + e.what());
  }
}

inline ordered_json to_json(const ChatResponse& r) {
  return ordered_json{{"request_id", r.request_id}, {"status", r.ok ? "OK" : "FAILED"}, {"text", r.text}};
}

template <typename Record, typename FromJson>
std::vector<Record> parse_lines(std::string_view text, FromJson from_json) {
  std::vector<Record> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      out.push_back(from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<ChatRequest> parse_requests(std::string_view text) {
  return parse_lines<ChatRequest>(text, request_from_json);
}

inline std::vector<ChatResponse> parse_responses(std::string_view text) {
  return parse_lines<ChatResponse>(text, response_from_json);
}

template <typename Record>
std::string serialize_lines(const std::vector<Record>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

// --- response repair ----------------------------------------------------------

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Returns the body of the first fenced code block, or the input when there is none.
inline std::string_view strip_fences(std::string_view s) {
  const auto open = s.find("```");
  if (open == std::string_view::npos) return trim(s);
  auto body_start = s.find('\n', open);
  if (body_start == std::string_view::npos) return trim(s);
  ++body_start;
  const auto close = s.find("```", body_start);
  return trim(s.substr(body_start, close == std::string_view::npos ? std::string_view::npos : close - body_start));
}

/// One repair pass: strip fences, then cut any prose around the outermost
/// braces, then parse. Throws MALFORMED on failure.
inline ordered_json parse_json_object(std::string_view response) {
  auto body = strip_fences(response);
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    throw Error(ErrorCode::Malformed, "no JSON object in response");
  try {
    auto j = ordered_json::parse(body.substr(open, close - open + 1));
    if (!j.is_object()) throw Error(ErrorCode::Malformed, "response is not a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Malformed, e.what());
  }
}

}  // namespace cinebench::chat
