#include "t2mx/eval/suite.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "t2mx/core/config.hpp"
#include "t2mx/core/error.hpp"
#include "t2mx/core/random.hpp"
#include "t2mx/infer/generate.hpp"

namespace t2mx::eval {

namespace {

constexpr std::uint64_t kPoolStream = 0;
constexpr std::uint64_t kDiversityStream = 1;
constexpr std::uint64_t kMultimodalityStream = 2;
constexpr std::uint64_t kGenerationStream = 3;
constexpr int kGenerationAttempts = 8;

constexpr std::array<std::pair<core::Modality, core::Modality>, 3> kPairs = {{
    {core::Modality::kBody, core::Modality::kHand},
    {core::Modality::kBody, core::Modality::kFace},
    {core::Modality::kHand, core::Modality::kFace},
}};

std::uint64_t round_seed(std::uint64_t seed, int round, std::uint64_t stream) {
  return core::derive_seed(core::derive_seed(seed, static_cast<std::uint64_t>(round)), stream);
}

std::vector<core::MotionClip> primaries(const EvalRound& round) {
  std::vector<core::MotionClip> out;
  out.reserve(round.size());
  for (const auto& g : round) {
    require(!g.motions.empty(), ErrorCode::kNoData, "generation group for '" + g.text + "' holds no motion");
    out.push_back(g.motions.front());
  }
  return out;
}

std::vector<core::MotionClip> carrying(const std::vector<core::MotionClip>& clips, core::Modality m) {
  std::vector<core::MotionClip> out;
  for (const auto& c : clips) {
    if (c.has(m)) out.push_back(c);
  }
  require(out.size() >= 2, ErrorCode::kNoData,
          "fewer than two reference clips carry the " + std::string(core::modality_name(m)) + " modality");
  return out;
}

nlohmann::json value_json(const MetricValue& v) { return {{"mean", v.mean}, {"interval", v.interval}}; }

std::string cell(const MetricValue& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f±%.3f", v.mean + 0.0, v.interval);
  return buf;
}

nlohmann::json report_config(const EvalExtractors& extractors, const EvalProtocol& protocol, int rounds) {
  return {{"protocol", protocol_to_json(protocol)},
          {"extractors", extractor_config_to_json(extractors.config())},
          {"rounds", rounds}};
}

infer::GeneratedMotion generate_with_retry(const gpt::GptCheckpoint& checkpoint, const std::string& text,
                                           infer::SamplerOptions options) {
  const std::uint64_t base = options.seed;
  for (int attempt = 0;; ++attempt) {
    options.seed = core::derive_seed(base, static_cast<std::uint64_t>(attempt));
    try {
      return infer::generate(checkpoint, {text, options});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTooShort || attempt + 1 >= kGenerationAttempts) throw;
    }
  }
}

}  // namespace

void EvalProtocol::validate() const {
  require(pool >= 2 && repetitions >= 1, ErrorCode::kConfig, "eval pool must be >= 2 and repetitions >= 1");
  require(diversity_pairs >= 1 && mm_pairs >= 1, ErrorCode::kConfig, "eval pair counts must be positive");
  require(mm_texts >= 0 && mm_generations >= 1, ErrorCode::kConfig, "eval multimodality counts are invalid");
  require(max_tokens >= 1, ErrorCode::kConfig, "eval max_tokens must be positive");
  sampling.validate();
}

nlohmann::json protocol_to_json(const EvalProtocol& p) {
  return {{"pool", p.pool},
          {"repetitions", p.repetitions},
          {"diversity_pairs", p.diversity_pairs},
          {"mm_pairs", p.mm_pairs},
          {"mm_texts", p.mm_texts},
          {"mm_generations", p.mm_generations},
          {"sampling", std::string(infer::sampling_mode_name(p.sampling.mode))},
          {"top_k", p.sampling.top_k},
          {"temperature", p.sampling.temperature},
          {"max_tokens", p.max_tokens},
          {"seed", p.seed}};
}

EvalProtocol protocol_from_json(const nlohmann::json& j) {
  core::ConfigReader r(j, "eval");
  EvalProtocol p;
  std::string mode(infer::sampling_mode_name(p.sampling.mode));
  r.read("pool", p.pool);
  r.read("repetitions", p.repetitions);
  r.read("diversity_pairs", p.diversity_pairs);
  r.read("mm_pairs", p.mm_pairs);
  r.read("mm_texts", p.mm_texts);
  r.read("mm_generations", p.mm_generations);
  r.read("sampling", mode);
  r.read("top_k", p.sampling.top_k);
  r.read("temperature", p.sampling.temperature);
  r.read("max_tokens", p.max_tokens);
  r.read("seed", p.seed);
  r.finish();
  p.sampling.mode = infer::sampling_mode_from_name(mode);
  p.validate();
  return p;
}

T2mReport t2m_eval(const EvalExtractors& extractors, const std::vector<core::MotionClip>& real,
                   const std::vector<EvalRound>& rounds, const EvalProtocol& protocol) {
  protocol.validate();
  require(!rounds.empty(), ErrorCode::kNoData, "t2m evaluation needs at least one round");
  const Features real_feats = extractors.motion_features(core::Modality::kBody, real);
  std::array<std::vector<double>, 3> rp;
  std::vector<double> fids, mm, div, mmod;
  T2mReport out;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const int ri = static_cast<int>(r);
    const EvalRound& round = rounds[r];
    std::vector<std::string> texts;
    for (const auto& g : round) texts.push_back(g.text);
    const Features tf = extractors.text_features(texts);
    const Features mf = extractors.motion_features(core::Modality::kBody, primaries(round));
    const FidResult f = fid(mf, real_feats);
    fids.push_back(f.value);
    out.fid_clipped = std::max(out.fid_clipped, f.clipped);
    const RPrecision p = r_precision(tf, mf, protocol.pool, round_seed(protocol.seed, ri, kPoolStream));
    for (std::size_t k = 0; k < 3; ++k) rp[k].push_back(p.top[k]);
    mm.push_back(mm_dist(tf, mf));
    div.push_back(diversity(mf, protocol.diversity_pairs, round_seed(protocol.seed, ri, kDiversityStream)).value);
    std::vector<Features> groups;
    for (const auto& g : round) {
      if (g.motions.size() >= 2) groups.push_back(extractors.motion_features(core::Modality::kBody, g.motions));
    }
    if (!groups.empty()) {
      mmod.push_back(multimodality(groups, protocol.mm_pairs, round_seed(protocol.seed, ri, kMultimodalityStream)).value);
    }
  }
  for (std::size_t k = 0; k < 3; ++k) out.r_precision[k] = summarize(rp[k]);
  out.fid = summarize(fids);
  out.mm_dist = summarize(mm);
  out.diversity = summarize(div);
  if (!mmod.empty()) out.multimodality = summarize(mmod);
  out.rounds = static_cast<int>(rounds.size());
  out.config = report_config(extractors, protocol, out.rounds);
  out.extractor_hash = extractors.hash();
  return out;
}

MatchingReport matching_eval(const EvalExtractors& extractors, const std::vector<core::MotionClip>& real,
                             const std::vector<EvalRound>& rounds, const EvalProtocol& protocol) {
  protocol.validate();
  require(!rounds.empty(), ErrorCode::kNoData, "matching evaluation needs at least one round");
  std::array<Features, 3> reference;
  for (core::Modality m : core::kModalities) {
    reference[static_cast<std::size_t>(core::index_of(m))] = extractors.motion_features(m, carrying(real, m));
  }
  struct Series {
    std::array<std::vector<double>, 3> ab, ba;
    std::vector<double> fa, fb, mm;
  };
  std::array<Series, 3> series;
  MatchingReport out;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const std::vector<core::MotionClip> clips = primaries(rounds[r]);
    for (const auto& c : clips) {
      require(c.has(core::Modality::kHand) && c.has(core::Modality::kFace), ErrorCode::kContract,
              "matching evaluation needs all three modalities on every sample (" + c.id() + ")");
    }
    std::array<Features, 3> feats;
    std::array<FidResult, 3> fids;
    for (core::Modality m : core::kModalities) {
      const auto i = static_cast<std::size_t>(core::index_of(m));
      feats[i] = extractors.motion_features(m, clips);
      fids[i] = fid(feats[i], reference[i]);
      out.fid_clipped = std::max(out.fid_clipped, fids[i].clipped);
    }
    for (std::size_t p = 0; p < kPairs.size(); ++p) {
      const auto a = static_cast<std::size_t>(core::index_of(kPairs[p].first));
      const auto b = static_cast<std::size_t>(core::index_of(kPairs[p].second));
      const std::uint64_t seed = round_seed(protocol.seed, static_cast<int>(r), kPoolStream + p);
      const RPrecision ab = r_precision(feats[b], feats[a], protocol.pool, seed);
      const RPrecision ba = r_precision(feats[a], feats[b], protocol.pool, seed);
      for (std::size_t k = 0; k < 3; ++k) {
        series[p].ab[k].push_back(ab.top[k]);
        series[p].ba[k].push_back(ba.top[k]);
      }
      series[p].fa.push_back(fids[a].value);
      series[p].fb.push_back(fids[b].value);
      series[p].mm.push_back(mm_dist(feats[a], feats[b]));
    }
  }
  for (std::size_t p = 0; p < kPairs.size(); ++p) {
    PairReport& pr = out.pairs[p];
    pr.a = kPairs[p].first;
    pr.b = kPairs[p].second;
    for (std::size_t k = 0; k < 3; ++k) {
      pr.a_to_b[k] = summarize(series[p].ab[k]);
      pr.b_to_a[k] = summarize(series[p].ba[k]);
    }
    pr.fid_a = summarize(series[p].fa);
    pr.fid_b = summarize(series[p].fb);
    pr.mm_dist = summarize(series[p].mm);
  }
  out.rounds = static_cast<int>(rounds.size());
  out.config = report_config(extractors, protocol, out.rounds);
  out.extractor_hash = extractors.hash();
  return out;
}

nlohmann::json t2m_to_json(const T2mReport& r) {
  nlohmann::json j = {{"r_precision", {{"top1", value_json(r.r_precision[0])},
                                       {"top2", value_json(r.r_precision[1])},
                                       {"top3", value_json(r.r_precision[2])}}},
                      {"fid", value_json(r.fid)},
                      {"mm_dist", value_json(r.mm_dist)},
                      {"diversity", value_json(r.diversity)},
                      {"multimodality", r.multimodality ? value_json(*r.multimodality) : nlohmann::json(nullptr)},
                      {"fid_clipped", r.fid_clipped},
                      {"rounds", r.rounds},
                      {"config", r.config},
                      {"extractor_hash", r.extractor_hash}};
  return j;
}

nlohmann::json matching_to_json(const MatchingReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairReport& p : r.pairs) {
    const std::string a(core::modality_name(p.a));
    const std::string b(core::modality_name(p.b));
    nlohmann::json ab = nlohmann::json::array();
    nlohmann::json ba = nlohmann::json::array();
    for (std::size_t k = 0; k < 3; ++k) {
      ab.push_back(value_json(p.a_to_b[k]));
      ba.push_back(value_json(p.b_to_a[k]));
    }
    pairs.push_back({{"a", a},
                     {"b", b},
                     {a + "->" + b, ab},
                     {b + "->" + a, ba},
                     {"fid_" + a, value_json(p.fid_a)},
                     {"fid_" + b, value_json(p.fid_b)},
                     {"mm_dist", value_json(p.mm_dist)}});
  }
  return {{"pairs", pairs},
          {"fid_clipped", r.fid_clipped},
          {"rounds", r.rounds},
          {"config", r.config},
          {"extractor_hash", r.extractor_hash}};
}

std::string t2m_csv(const std::vector<std::pair<std::string, T2mReport>>& rows) {
  std::ostringstream os;
  os << "Methods,R-Precision Top-1,R-Precision Top-2,R-Precision Top-3,FID,MM-Dist,Diversity,MModality\n";
  for (const auto& [label, r] : rows) {
    os << label << ',' << cell(r.r_precision[0]) << ',' << cell(r.r_precision[1]) << ',' << cell(r.r_precision[2])
       << ',' << cell(r.fid) << ',' << cell(r.mm_dist) << ',' << cell(r.diversity) << ','
       << (r.multimodality ? cell(*r.multimodality) : std::string("-")) << '\n';
  }
  return os.str();
}

std::string matching_csv(const std::vector<std::pair<std::string, MatchingReport>>& rows) {
  std::ostringstream os;
  for (std::size_t p = 0; p < kPairs.size(); ++p) {
    const std::string a(core::modality_name(kPairs[p].first));
    const std::string b(core::modality_name(kPairs[p].second));
    if (p > 0) os << '\n';
    os << "Pair,Methods";
    for (const auto& dir : {a + "->" + b, b + "->" + a}) {
      for (int k = 1; k <= 3; ++k) os << ',' << dir << " Top-" << k;
    }
    os << ",FID (" << a << "),FID (" << b << "),MM-Dist\n";
    for (const auto& [label, r] : rows) {
      const PairReport& pr = r.pairs[p];
      os << a << '-' << b << ',' << label;
      for (const auto& v : pr.a_to_b) os << ',' << cell(v);
      for (const auto& v : pr.b_to_a) os << ',' << cell(v);
      os << ',' << cell(pr.fid_a) << ',' << cell(pr.fid_b) << ',' << cell(pr.mm_dist) << '\n';
    }
  }
  return os.str();
}

EvalRound real_round(const std::vector<core::MotionClip>& clips) {
  EvalRound out;
  for (const auto& c : clips) {
    require(!c.text().empty(), ErrorCode::kNoData, "clip " + c.id() + " has no description");
    out.push_back({c.text().front(), {c}});
  }
  return out;
}

EvalRound generate_round(const gpt::GptCheckpoint& checkpoint, const std::vector<core::MotionClip>& clips,
                         const EvalProtocol& protocol, int round) {
  protocol.validate();
  EvalRound out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    require(!clips[i].text().empty(), ErrorCode::kNoData, "clip " + clips[i].id() + " has no description");
    GenerationGroup g;
    g.text = clips[i].text().front();
    const int count = static_cast<int>(i) < protocol.mm_texts ? protocol.mm_generations : 1;
    for (int k = 0; k < count; ++k) {
      infer::SamplerOptions o;
      o.sampling = protocol.sampling;
      o.max_tokens = protocol.max_tokens;
      o.seed = core::derive_seed(round_seed(protocol.seed, round, kGenerationStream),
                                 static_cast<std::uint64_t>(i) * 1000003ULL + static_cast<std::uint64_t>(k));
      g.motions.push_back(generate_with_retry(checkpoint, g.text, o).clip);
    }
    out.push_back(std::move(g));
  }
  return out;
}

EvalRound random_round(const gpt::ExpertSet& experts, const std::vector<core::MotionClip>& clips,
                       const EvalProtocol& protocol, int round) {
  EvalRound out;
  const int l = experts[0]->downsample();
  for (std::size_t i = 0; i < clips.size(); ++i) {
    require(!clips[i].text().empty(), ErrorCode::kNoData, "clip " + clips[i].id() + " has no description");
    const int length = std::max(1, clips[i].frames() / l);
    const std::uint64_t seed =
        core::derive_seed(round_seed(protocol.seed, round, kGenerationStream), static_cast<std::uint64_t>(i));
    out.push_back({clips[i].text().front(), {infer::decode_random_tokens(experts, length, seed).clip}});
  }
  return out;
}

}  // namespace t2mx::eval
