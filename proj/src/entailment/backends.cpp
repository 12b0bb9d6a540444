#include "abstain/entailment/backends.h"

#include <cctype>

#include "abstain/core/digest.h"
#include "abstain/entailment/icl_prompt.h"
#include "abstain/error.h"

namespace abstain {

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::kNliService:
      return "nli_service";
    case BackendKind::kLlmIcl:
      return "llm_icl";
    case BackendKind::kMockExactMatch:
      return "mock_exact_match";
  }
  return "mock_exact_match";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "nli_service") return BackendKind::kNliService;
  if (name == "llm_icl") return BackendKind::kLlmIcl;
  if (name == "mock_exact_match") return BackendKind::kMockExactMatch;
  throw ConfigError("unknown entailment backend '" + std::string(name) +
                    "' (expected nli_service, llm_icl or mock_exact_match)");
}

void BackendConfig::validate() const {
  const bool service = kind != BackendKind::kMockExactMatch;
  if (service && endpoint.empty()) {
    throw ConfigError(std::string(to_string(kind)) + " backend requires an endpoint");
  }
  if (!service && !endpoint.empty()) {
    throw ConfigError("mock_exact_match backend takes no endpoint");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
  if (kind == BackendKind::kLlmIcl && model_id.empty()) {
    throw ConfigError("llm_icl backend requires a model_id");
  }
}

std::string normalize_for_match(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
    } else if (std::ispunct(c)) {
      continue;
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  return out;
}

bool mock_equivalence(std::string_view, std::string_view s, std::string_view s_prime) {
  return normalize_for_match(s) == normalize_for_match(s_prime);
}

Verdict MockExactMatchBackend::check_entailment(std::string_view question, std::string_view a,
                                                std::string_view b) {
  ++calls_;
  return mock_equivalence(question, a, b) ? Verdict::kEntailment : Verdict::kNeutral;
}

namespace {

HttpEndpoint endpoint_from(const BackendConfig& config) {
  HttpEndpoint endpoint;
  endpoint.base_url = config.endpoint;
  endpoint.api_key = config.api_key;
  endpoint.timeout = config.timeout;
  endpoint.max_retries = config.max_retries;
  endpoint.backoff = config.backoff;
  endpoint.max_in_flight = config.max_in_flight;
  return endpoint;
}

}  // namespace

NliServiceBackend::NliServiceBackend(const BackendConfig& config)
    : http_(endpoint_from(config)), model_id_(config.model_id), separator_(config.nli_separator) {}

std::string NliServiceBackend::id() const { return "nli_service:" + model_id_; }

Verdict NliServiceBackend::check_entailment(std::string_view question, std::string_view a,
                                            std::string_view b) {
  const std::string q(question);
  Json body{{"premise", q + separator_ + std::string(a)},
            {"hypothesis", q + separator_ + std::string(b)},
            {"model", model_id_}};
  const Json reply = http_.post("", body);
  if (!reply.contains("label") || !reply["label"].is_string()) {
    throw BackendError("NLI reply lacks a string 'label': " + reply.dump());
  }
  return parse_verdict(reply["label"].get<std::string>());
}

LlmIclBackend::LlmIclBackend(std::shared_ptr<ChatClient> chat, int max_tokens)
    : chat_(std::move(chat)), max_tokens_(max_tokens) {}

std::string LlmIclBackend::id() const { return "llm_icl:" + chat_->model_id(); }

Verdict LlmIclBackend::check_entailment(std::string_view question, std::string_view a,
                                        std::string_view b) {
  ChatRequest request;
  request.prompt = render_entailment_prompt(question, a, b);
  request.temperature = 0.0;
  request.max_tokens = max_tokens_;
  return parse_verdict(chat_->complete(request));
}

CachingBackend::CachingBackend(std::unique_ptr<EntailmentBackend> inner,
                               std::filesystem::path cache_path)
    : inner_(std::move(inner)), inner_id_(inner_->id()), cache_(std::move(cache_path)) {}

Verdict CachingBackend::check_entailment(std::string_view question, std::string_view a,
                                         std::string_view b) {
  const std::string key = digest_fields({inner_id_, question, a, b});
  if (auto hit = cache_.get(key)) return parse_verdict(hit->get<std::string>());
  ++misses_;
  const Verdict verdict = inner_->check_entailment(question, a, b);
  cache_.put(key, std::string(to_string(verdict)));
  return verdict;
}

std::unique_ptr<EntailmentBackend> make_backend(const BackendConfig& config) {
  config.validate();
  std::unique_ptr<EntailmentBackend> inner;
  switch (config.kind) {
    case BackendKind::kMockExactMatch:
      inner = std::make_unique<MockExactMatchBackend>();
      break;
    case BackendKind::kNliService:
      inner = std::make_unique<NliServiceBackend>(config);
      break;
    case BackendKind::kLlmIcl:
      inner = std::make_unique<LlmIclBackend>(
          std::make_shared<HttpChatClient>(endpoint_from(config), config.model_id),
          config.max_tokens);
      break;
  }
  return std::make_unique<CachingBackend>(std::move(inner), config.cache_path);
}

bool are_semantically_equivalent(std::string_view question, std::string_view s,
                                 std::string_view s_prime, EntailmentBackend& backend) {
  if (trim(s) == trim(s_prime)) return true;
  const Verdict forward = backend.check_entailment(question, s, s_prime);
  const Verdict backward = backend.check_entailment(question, s_prime, s);
  return forward == Verdict::kEntailment && backward == Verdict::kEntailment;
}

EquivalenceOracle equivalence_oracle(EntailmentBackend& backend) {
  return [&backend](std::string_view question, std::string_view a, std::string_view b) {
    return are_semantically_equivalent(question, a, b, backend);
  };
}

}  // namespace abstain
