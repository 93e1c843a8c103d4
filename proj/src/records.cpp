#include "cisc/records.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace cisc {

using json = nlohmann::json;

namespace {

constexpr std::string_view kMarker = "Proposed answer:";

struct KindName {
  DatasetKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {DatasetKind::gsm8k, "gsm8k"},         {DatasetKind::math, "math"},
    {DatasetKind::mmlu_pro, "mmlu_pro"},   {DatasetKind::bbh_options, "bbh_options"},
    {DatasetKind::bbh_free, "bbh_free"},   {DatasetKind::generic, "generic"},
};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// True when s[0] is '(' and its matching ')' is the last character.
bool wrapped_in_parens(std::string_view s) {
  if (s.size() < 2 || s.front() != '(' || s.back() != ')') return false;
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') {
      --depth;
      if (depth == 0) return i + 1 == s.size();
    }
  }
  return false;
}

bool is_option_kind(DatasetKind kind) {
  return kind == DatasetKind::mmlu_pro || kind == DatasetKind::bbh_options;
}

const std::regex& plain_number() {
  static const std::regex re(R"(^([+-]?)(\d+)(?:\.(\d+))?$)");
  return re;
}

// "1,000.50" -> "1000.5"; returns nullopt when s is not a plain number.
std::optional<std::string> normalize_number(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : s)
    if (c != ',') stripped.push_back(c);
  // Commas are only thousands separators when digits surround them.
  if (stripped.size() != s.size() && (s.front() == ',' || s.back() == ',')) return std::nullopt;

  std::smatch m;
  if (!std::regex_match(stripped, m, plain_number())) return std::nullopt;
  std::string integral = m[2].str();
  std::string fraction = m[3].matched ? m[3].str() : std::string();

  auto first_nonzero = integral.find_first_not_of('0');
  integral = first_nonzero == std::string::npos ? "0" : integral.substr(first_nonzero);
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();

  std::string out;
  bool zero = integral == "0" && fraction.empty();
  if (m[1].str() == "-" && !zero) out = "-";
  out += integral;
  if (!fraction.empty()) out += "." + fraction;
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool in_space = false;
  for (char c : s) {
    if (is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

std::string canonical_step(std::string_view raw, DatasetKind kind) {
  std::string s(trim(raw));
  for (;;) {
    std::string before = s;
    if (wrapped_in_parens(s)) s = std::string(trim(std::string_view(s).substr(1, s.size() - 2)));
    while (!s.empty() && s.back() == '.') s.pop_back();
    s = std::string(trim(s));
    if (kind == DatasetKind::math && s.size() >= 2 && s.front() == '$' && s.back() == '$')
      s = std::string(trim(std::string_view(s).substr(1, s.size() - 2)));
    if (s == before) break;
  }
  if (kind == DatasetKind::math) s = collapse_whitespace(s);

  if (is_option_kind(kind)) {
    // "b", "b)", "b) some text" and "(b) some text" all select option B.
    const std::size_t at = !s.empty() && s[0] == '(' ? 1 : 0;
    const bool letter = s.size() > at && std::isalpha(static_cast<unsigned char>(s[at]));
    const bool bare = at == 0 && s.size() == 1;
    const bool closed = s.size() > at + 1 && (s[at + 1] == ')' || (at == 0 && s[at + 1] == ':')) &&
                        (s.size() == at + 2 || is_space(s[at + 2]));
    if (letter && (bare || closed)) s = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(s[at]))));
  }
  if (!s.empty()) {
    if (auto number = normalize_number(s)) s = *number;
  }
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw DumpError(line, "line " + std::to_string(line) + ": " + msg);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(line, std::string("missing required field `") + key + "`");
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) fail(line, std::string("field `") + key + "` must be a string");
  return v.get<std::string>();
}

struct ParsedLine {
  std::string question_id;
  DatasetKind kind;
  std::string question_text;
  std::string gold_raw;
  ResponseRecord record;
};

ParsedLine parse_line(const std::string& text, std::size_t line, const LoadOptions& options) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(line, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) fail(line, "record must be a JSON object");

  ParsedLine out;
  out.question_id = require_string(obj, "question_id", line);
  std::string kind_name = require_string(obj, "dataset_kind", line);
  try {
    out.kind = parse_dataset_kind(kind_name);
  } catch (const std::invalid_argument&) {
    fail(line, "unknown dataset_kind `" + kind_name + "`");
  }
  if (options.dataset_kind) out.kind = *options.dataset_kind;
  out.gold_raw = require_string(obj, "gold_answer", line);
  if (auto it = obj.find("question_text"); it != obj.end()) {
    if (!it->is_string()) fail(line, "field `question_text` must be a string");
    out.question_text = it->get<std::string>();
  }

  ResponseRecord& r = out.record;
  const json& index = require(obj, "response_index", line);
  if (!index.is_number_integer() || index.get<long long>() < 0)
    fail(line, "field `response_index` must be a non-negative integer");
  r.response_index = index.get<int>();
  r.response_text = require_string(obj, "response_text", line);

  if (auto it = obj.find("reasoning_logprobs"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) fail(line, "field `reasoning_logprobs` must be an array");
    std::vector<TokenLogprob> tokens;
    bool valid = true;
    for (const auto& entry : *it) {
      if (!entry.is_object() || !entry.contains("token") || !entry.contains("logprob") ||
          !entry["token"].is_string() || !entry["logprob"].is_number())
        fail(line, "`reasoning_logprobs` entries must be {token, logprob}");
      double lp = entry["logprob"].get<double>();
      if (!(lp <= 0.0)) valid = false;
      tokens.push_back({entry["token"].get<std::string>(), lp});
    }
    if (valid)
      r.reasoning_logprobs = std::move(tokens);
    else
      r.flags.emplace(flag::kInvalidLogprob);
  }
  if (auto it = obj.find("confidence_continuation"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail(line, "field `confidence_continuation` must be a string");
    r.confidence_continuation = it->get<std::string>();
  }
  if (auto it = obj.find("confidence_token_candidates"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) fail(line, "field `confidence_token_candidates` must be an object");
    std::map<std::string, double> candidates;
    bool valid = true;
    for (const auto& [token, prob] : it->items()) {
      if (!prob.is_number()) fail(line, "candidate probabilities must be numbers");
      double p = prob.get<double>();
      if (!(p >= 0.0 && p <= 1.0)) valid = false;
      candidates[token] = p;
    }
    if (valid)
      r.confidence_token_candidates = std::move(candidates);
    else
      r.flags.emplace(flag::kInvalidCandidateProbability);
  }
  if (auto it = obj.find("flags"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) fail(line, "field `flags` must be an array of strings");
    for (const auto& f : *it) {
      if (!f.is_string()) fail(line, "field `flags` must be an array of strings");
      r.flags.insert(f.get<std::string>());
    }
  }
  derive_answer(r, out.kind);
  return out;
}

}  // namespace

std::string_view to_string(DatasetKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "generic";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown dataset kind: " + std::string(name));
}

std::string_view ResponseRecord::vote_answer() const {
  if (canonical_answer) return *canonical_answer;
  return kSentinelAnswer;
}

DumpError::DumpError(std::size_t line, const std::string& what) : std::runtime_error(what), line_(line) {}

std::optional<std::string> extract_answer(std::string_view text, DatasetKind /*kind*/) {
  auto pos = text.rfind(kMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = text.substr(pos + kMarker.size());
  while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);

  std::string_view payload;
  if (!rest.empty() && rest.front() == '(') {
    int depth = 0;
    std::size_t close = std::string_view::npos;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (rest[i] == '(') ++depth;
      if (rest[i] == ')' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close != std::string_view::npos) {
      payload = rest.substr(1, close - 1);
    } else {
      // Unterminated: take the rest of the line and drop closing punctuation.
      payload = rest.substr(0, rest.find('\n')).substr(1);
      while (!payload.empty() && (payload.back() == ')' || payload.back() == '.' || is_space(payload.back())))
        payload.remove_suffix(1);
    }
  } else {
    payload = rest.substr(0, rest.find('\n'));
    payload = trim(payload);
    while (!payload.empty() && (payload.back() == '.' || payload.back() == ')')) payload.remove_suffix(1);
  }
  payload = trim(payload);
  if (payload.empty()) return std::nullopt;
  return std::string(payload);
}

std::string canonicalize_answer(std::string_view raw, DatasetKind kind) {
  std::string s(raw);
  for (;;) {
    std::string next = canonical_step(s, kind);
    if (next == s) break;
    s = std::move(next);
  }
  if (s.empty()) throw std::invalid_argument("answer is empty after normalization");
  return s;
}

void derive_answer(ResponseRecord& record, DatasetKind kind) {
  record.raw_answer = extract_answer(record.response_text, kind);
  record.canonical_answer.reset();
  if (!record.raw_answer) {
    record.flags.emplace(flag::kAnswerExtractionFailed);
    return;
  }
  try {
    std::string canonical = canonicalize_answer(*record.raw_answer, kind);
    if (canonical == kSentinelAnswer) throw std::invalid_argument("reserved answer");
    record.canonical_answer = std::move(canonical);
  } catch (const std::invalid_argument&) {
    record.flags.emplace(flag::kAnswerCanonicalizationFailed);
  }
}

std::vector<QuestionBundle> parse_dump(std::istream& in, const LoadOptions& options) {
  std::vector<QuestionBundle> bundles;
  std::unordered_map<std::string, std::size_t> by_id;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (trim(text).empty()) continue;
    ParsedLine parsed = parse_line(text, line, options);

    std::string gold;
    try {
      gold = canonicalize_answer(parsed.gold_raw, parsed.kind);
    } catch (const std::invalid_argument&) {
      fail(line, "gold_answer is empty after normalization");
    }
    if (gold == kSentinelAnswer) fail(line, "gold_answer uses the reserved sentinel");

    auto [it, inserted] = by_id.try_emplace(parsed.question_id, bundles.size());
    if (inserted) {
      QuestionBundle b;
      b.question_id = parsed.question_id;
      b.dataset_kind = parsed.kind;
      b.question_text = std::move(parsed.question_text);
      b.gold_answer = std::move(gold);
      bundles.push_back(std::move(b));
    } else {
      const QuestionBundle& b = bundles[it->second];
      if (b.dataset_kind != parsed.kind || b.gold_answer != gold || b.question_text != parsed.question_text)
        fail(line, "duplicate question_id `" + parsed.question_id + "` with conflicting question fields");
      for (const auto& r : b.responses)
        if (r.response_index == parsed.record.response_index)
          fail(line, "duplicate response_index " + std::to_string(r.response_index) + " for question_id `" +
                         parsed.question_id + "`");
    }
    bundles[it->second].responses.push_back(std::move(parsed.record));
  }
  for (auto& b : bundles)
    std::stable_sort(b.responses.begin(), b.responses.end(),
                     [](const ResponseRecord& a, const ResponseRecord& c) { return a.response_index < c.response_index; });
  return bundles;
}

std::vector<QuestionBundle> load_dump(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DumpError(0, "cannot read " + path.string());
  return parse_dump(in, options);
}

void write_dump(std::ostream& out, std::span<const QuestionBundle> bundles) {
  for (const auto& b : bundles) {
    for (const auto& r : b.responses) {
      json obj = json::object();
      obj["question_id"] = b.question_id;
      obj["dataset_kind"] = std::string(to_string(b.dataset_kind));
      obj["question_text"] = b.question_text;
      obj["gold_answer"] = b.gold_answer;
      obj["response_index"] = r.response_index;
      obj["response_text"] = r.response_text;
      if (r.reasoning_logprobs) {
        json arr = json::array();
        for (const auto& t : *r.reasoning_logprobs) arr.push_back({{"token", t.token}, {"logprob", t.logprob}});
        obj["reasoning_logprobs"] = std::move(arr);
      }
      if (r.confidence_continuation) obj["confidence_continuation"] = *r.confidence_continuation;
      if (r.confidence_token_candidates) obj["confidence_token_candidates"] = *r.confidence_token_candidates;
      if (!r.flags.empty()) obj["flags"] = r.flags;
      out << obj.dump() << '\n';
    }
  }
}

std::size_t total_responses(std::span<const QuestionBundle> bundles) {
  std::size_t n = 0;
  for (const auto& b : bundles) n += b.responses.size();
  return n;
}

std::size_t total_flags(std::span<const QuestionBundle> bundles) {
  std::size_t n = 0;
  for (const auto& b : bundles)
    for (const auto& r : b.responses) n += r.flags.size();
  return n;
}

}  // namespace cisc
