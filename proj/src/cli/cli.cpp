// Copyright 2026 The id-kit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idkit/cli/cli.hpp"

#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "idkit/adapter/checkpoint.hpp"
#include "idkit/caption/captioner.hpp"
#include "idkit/core/error.hpp"
#include "idkit/core/fileio.hpp"
#include "idkit/core/hash.hpp"
#include "idkit/dataset/corpus.hpp"
#include "idkit/dataset/pipeline.hpp"
#include "idkit/diffusion/generation.hpp"
#include "idkit/io/image_io.hpp"
#include "idkit/train/trainer.hpp"

namespace idkit::cli {

namespace {

// Invariant violations found by `inspect`.
class ValidationError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  std::string data_root;
  std::string preset = "full";
  std::uint64_t seed = 0;
  bool json = false;
  bool verbose = false;
  bool quiet = false;
};

struct Context {
  fs::path root;
  Globals g;
  std::ostream& out;
  std::ostream& err;

  fs::path path(const std::string& p) const { return resolve_under(root, p); }
  bool ci() const { return g.preset == "ci"; }
  void emit(const std::string& text, const json& summary) const {
    if (g.json)
      out << summary.dump() << "\n";
    else
      out << text;
  }
};

BackboneSpec preset_backbone(const Context& ctx) { return ctx.ci() ? BackboneSpec::ci() : BackboneSpec::full_scale(); }

// ---------------------------------------------------------------- synth-corpus

struct SynthOptions {
  std::string spec_file;
  std::string out = "corpus";
  int count = 10;
  int multi_face = 3;
  std::optional<int> frames, height, width;
};

void cmd_synth_corpus(const Context& ctx, const SynthOptions& o) {
  CorpusSpec spec;
  if (!o.spec_file.empty()) {
    const fs::path p = ctx.path(o.spec_file);
    if (!fs::exists(p)) throw ConfigError("corpus spec not found: " + p.string());
    json j;
    try {
      j = read_json(p);
    } catch (const json::exception& e) {
      throw ConfigError("corpus spec " + p.string() + ": " + e.what());
    }
    spec = CorpusSpec::from_json(j);
  } else {
    spec = CorpusSpec::uniform(o.count, o.multi_face);
  }
  if (o.frames) spec.frames = *o.frames;
  if (o.height) spec.height = *o.height;
  if (o.width) spec.width = *o.width;
  spec.validate();
  const auto corpus = generate_synthetic_corpus(spec, ctx.g.seed);
  const fs::path out = ctx.path(o.out);
  write_corpus(out, corpus);
  int multi = 0;
  for (const auto& v : corpus.ground_truth["videos"]) multi += v["multi_face"].get<bool>() ? 1 : 0;
  ctx.emit(fmt::format("wrote {} videos ({} multi-face) to {}\n", corpus.videos.size(), multi, out.string()),
           {{"command", "synth-corpus"}, {"videos", corpus.videos.size()}, {"multi_face", multi}, {"out", out}});
}

// ---------------------------------------------------------------- build-dataset

struct BuildOptions {
  std::string in = "corpus";
  std::string out = ".";
  std::optional<int> clip_length, size, pool_target, ref_size;
};

void cmd_build_dataset(const Context& ctx, const BuildOptions& o) {
  DatasetConfig cfg = ctx.ci() ? DatasetConfig::ci() : DatasetConfig::full_scale();
  if (o.clip_length) cfg.clip_length = *o.clip_length;
  if (o.size) cfg.size = *o.size;
  if (o.pool_target) cfg.pool.pool_target = *o.pool_target;
  if (o.ref_size) cfg.pool.ref_size = *o.ref_size;
  cfg.seed = ctx.g.seed;
  const fs::path in = ctx.path(o.in);
  if (!fs::is_directory(in)) throw ConfigError("corpus directory not found: " + in.string());
  const fs::path out = ctx.path(o.out);
  const DiskDetector detector;
  const BuildReport report = build_dataset(in, out, cfg, detector);
  if (report.records.empty()) ctx.err << "warning: manifest is empty\n";
  std::string text = fmt::format("kept {}, dropped {}\n", report.filter.kept.size(), report.filter.dropped.size());
  for (const auto& [id, why] : report.filter.reasons) text += fmt::format("  dropped {}: {}\n", id, why);
  text += "manifest: " + (out / kManifestName).string() + "\n";
  json summary = report.to_json();
  summary["command"] = "build-dataset";
  summary["manifest"] = (out / kManifestName).string();
  ctx.emit(text, summary);
}

// ---------------------------------------------------------------- caption

struct CaptionCliOptions {
  std::string manifest = kManifestName;
  std::string endpoints;
  std::string quarantine;
  int concurrency = 2;
};

void cmd_caption(const Context& ctx, const CaptionCliOptions& o) {
  const fs::path endpoints_path = ctx.path(o.endpoints);
  const CaptionEndpoints endpoints = CaptionEndpoints::load(endpoints_path);
  const fs::path manifest = ctx.path(o.manifest);
  const fs::path root = manifest.parent_path();
  auto records = read_manifest(manifest, root);
  CaptionOptions opts;
  opts.root = root;
  opts.manifest_out = manifest;
  opts.quarantine_out = o.quarantine.empty() ? root / "quarantine.jsonl" : ctx.path(o.quarantine);
  opts.concurrency = o.concurrency;
  const auto summary = caption_corpus(records, make_caption_clients(endpoints), opts);
  json j = summary.to_json();
  j["command"] = "caption";
  j["quarantine"] = opts.quarantine_out.string();
  ctx.emit(fmt::format("{} records: {} captioned, {} already complete, {} quarantined; {} new calls\n",
                       summary.records, summary.captioned, summary.skipped, summary.quarantined,
                       summary.client_calls),
           j);
}

// ---------------------------------------------------------------- train

struct TrainCliOptions {
  std::string manifest = kManifestName;
  std::string config;
  std::string out = "run";
  std::optional<int> steps, batch_size, checkpoint_every;
  std::optional<double> lr, null_text_prob, lambda;
  std::string resume;
  int stop_after = -1;
};

void cmd_train(const Context& ctx, const TrainCliOptions& o) {
  TrainConfig tc;
  tc.seed = ctx.g.seed;
  AdapterConfig ac;
  BackboneSpec spec = preset_backbone(ctx);
  if (!o.config.empty()) {
    const fs::path p = ctx.path(o.config);
    if (!fs::exists(p)) throw ConfigError("train config not found: " + p.string());
    const json j = read_json(p);
    tc = TrainConfig::from_json(j, tc);
    if (j.contains("adapter")) ac = AdapterConfig::from_json(j["adapter"]);
    if (j.contains("backbone")) spec = BackboneSpec::from_json(j["backbone"]);
  }
  if (o.steps) tc.steps = *o.steps;
  if (o.batch_size) tc.batch_size = *o.batch_size;
  if (o.checkpoint_every) tc.checkpoint_every = *o.checkpoint_every;
  if (o.lr) tc.lr = *o.lr;
  if (o.null_text_prob) tc.null_text_prob = *o.null_text_prob;
  if (o.lambda) tc.lambda_train = *o.lambda;
  tc.validate();
  if (tc.lr == 0.0) ctx.err << "warning: lr is 0; adapter weights will not change\n";

  const Backbone backbone(spec);
  const auto extractor = make_extractor(ac.extractor);
  const fs::path manifest = ctx.path(o.manifest);
  const TrainingData data = load_training_data(manifest, manifest.parent_path(), backbone, *extractor);
  TrainLoopOptions lo;
  lo.out_dir = ctx.path(o.out);
  lo.stop_after = o.stop_after;
  if (!o.resume.empty()) lo.resume = o.resume;
  const TrainResult r = train_loop(data, backbone, ac, tc, lo);
  json j{{"command", "train"},
         {"steps_run", r.records.size()},
         {"final_checkpoint", r.final_checkpoint.string()},
         {"metrics", (lo.out_dir / "metrics.jsonl").string()},
         {"bad_steps", r.bad_steps}};
  if (!r.records.empty()) j["final_loss"] = r.records.back().loss;
  ctx.emit(fmt::format("trained {} steps; checkpoint {}\n", r.records.size(), r.final_checkpoint.string()), j);
}

// ---------------------------------------------------------------- generate

struct GenerateOptions {
  std::string checkpoint;
  std::string config;
  std::optional<std::string> prompt;
  std::vector<std::string> refs;
  std::vector<double> mix;
  std::optional<double> lambda, scale;
  std::optional<int> frames, steps;
  std::string out = "generated";
  bool no_gif = false;
};

void cmd_generate(const Context& ctx, const GenerateOptions& o, const std::string& usage) {
  GenerationConfig gc;
  gc.seed = ctx.g.seed;
  if (!o.config.empty()) gc = GenerationConfig::from_json(read_json(ctx.path(o.config)));
  if (o.prompt) gc.prompt = *o.prompt;
  if (!o.refs.empty()) gc.reference_images = o.refs;
  if (!o.mix.empty()) gc.mix_weights = o.mix;
  if (o.lambda) gc.lambda = *o.lambda;
  if (o.scale) gc.guidance_scale = *o.scale;
  if (o.frames) gc.frames = *o.frames;
  if (o.steps) gc.steps = *o.steps;
  if (!gc.mix_weights.empty() && gc.mix_weights.size() != gc.reference_images.size())
    throw ConfigError(fmt::format("{} mix weights for {} reference images\n{}", gc.mix_weights.size(),
                                  gc.reference_images.size(), usage));
  gc.validate();

  std::optional<AdapterWeights> adapter;
  BackboneSpec spec = preset_backbone(ctx);
  if (!o.checkpoint.empty()) adapter = load_adapter(ctx.path(o.checkpoint), &spec);
  if (!gc.reference_images.empty() && !adapter) throw ConfigError("--ref needs --checkpoint");
  const Backbone backbone(spec);
  std::vector<Image> refs;
  for (const auto& r : gc.reference_images) refs.push_back(read_png(ctx.path(r)));
  std::unique_ptr<FeatureExtractor> extractor;
  if (adapter) extractor = make_extractor(adapter->config.extractor);

  const GenerationResult res = generate(gc, backbone, adapter ? &*adapter : nullptr, extractor.get(), refs);
  const fs::path out = ctx.path(o.out);
  const auto files = write_frames(out, res.frames);
  if (!o.no_gif) write_gif(out / "preview.gif", res.frames);
  json j{{"command", "generate"}, {"config", gc.to_json()}, {"frames", files.size()}, {"out", out.string()}};
  ctx.emit(gc.to_json().dump(2) + "\n", j);
}

// ---------------------------------------------------------------- inspect

json inspect_pool(const fs::path& dir) {
  const FacePool pool = load_pool(dir, false);
  std::map<int, int> faces_at;
  for (const auto& a : pool.attempts) faces_at[a.frame] = a.n_faces;
  std::set<int> seen;
  for (std::size_t k = 0; k < pool.source_frames.size(); ++k) {
    const int f = pool.source_frames[k];
    const std::string crop = fmt::format("crop_{}.png", k);
    if (!fs::exists(dir / crop)) throw ValidationError(crop + " is missing");
    if (!seen.insert(f).second) throw ValidationError(fmt::format("{} repeats source frame {}", crop, f));
    auto it = faces_at.find(f);
    if (it == faces_at.end()) throw ValidationError(fmt::format("{}: frame {} has no detection record", crop, f));
    if (it->second != 1)
      throw ValidationError(fmt::format("{} comes from frame {} with {} detected faces", crop, f, it->second));
    if (pool.boxes[k].frame_index != f) throw ValidationError(crop + ": box frame does not match source frame");
  }
  if (pool.source_frames.empty()) throw ValidationError("pool is empty");
  return {{"kind", "pool"}, {"video_id", pool.video_id}, {"crops", pool.source_frames.size()},
          {"attempts", pool.attempts.size()}};
}

json inspect_checkpoint(const fs::path& path) {
  BackboneSpec spec;
  const AdapterWeights w = load_adapter(path, &spec);
  const auto info = read_checkpoint_info(path);
  return {{"kind", "checkpoint"},
          {"format_version", info.header["format_version"]},
          {"backbone_spec_hash", info.header["backbone_spec_hash"]},
          {"parameters", w.parameter_count()},
          {"sites", spec.cross_attention_ids()},
          {"extra", info.header.value("extra", json::object())}};
}

bool has_magic(const fs::path& p, const char* magic) {
  const auto bytes = read_bytes(p);
  return bytes.size() >= 8 && std::memcmp(bytes.data(), magic, 7) == 0;
}

void cmd_inspect(const Context& ctx, const std::string& target) {
  const fs::path p = ctx.path(target);
  if (!fs::exists(p)) throw ConfigError("no such path: " + p.string());
  json j;
  if (fs::is_directory(p)) {
    if (!fs::exists(p / "pool.json")) throw ConfigError("directory is not a face pool: " + p.string());
    j = inspect_pool(p);
  } else if (p.extension() == ".jsonl") {
    const auto records = read_manifest(p, p.parent_path());
    int captioned = 0;
    for (const auto& r : records) captioned += r.unified_caption.empty() ? 0 : 1;
    j = {{"kind", "manifest"}, {"records", records.size()}, {"captioned", captioned}};
  } else if (p.filename() == "pool.json") {
    j = inspect_pool(p.parent_path());
  } else if (has_magic(p, "IDKCKPT")) {
    j = inspect_checkpoint(p);
  } else if (has_magic(p, "IDKOPT1")) {
    const AdamState s = AdamState::load(p);
    j = {{"kind", "optimizer"}, {"step", s.step}, {"tensors", s.m.size()}};
  } else if (has_magic(p, "IDKCLIP")) {
    const auto shape = read_clip_shape(p);
    read_clip(p);
    j = {{"kind", "clip"}, {"shape", shape}};
  } else {
    throw ConfigError("unrecognized file type: " + p.string());
  }
  j["path"] = p.string();
  j["valid"] = true;
  ctx.emit(j.dump(2) + "\n", j);
}

void configure_logging(const Globals& g, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("idkit", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(g.quiet ? spdlog::level::err : g.verbose ? spdlog::level::debug : spdlog::level::info);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"id-kit: identity-conditioned video diffusion toolkit", "idkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Show help for every command");
  Globals g;
  app.add_option("--data-root", g.data_root, "Dataset root; relative paths resolve here (default $ID_KIT_DATA_ROOT or .)");
  app.add_option("--preset", g.preset, "Configuration profile")->check(CLI::IsMember({"full", "ci"}));
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_flag("--json", g.json, "Print a one-line JSON summary instead of text");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Errors only");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth-corpus", "Generate a synthetic video corpus with ground truth");
  synth->add_option("--spec", so.spec_file, "Corpus spec JSON ({videos:[...]} or {count, multi_face})");
  synth->add_option("--out", so.out, "Output directory")->capture_default_str();
  synth->add_option("--count", so.count, "Videos when no spec is given")->capture_default_str();
  synth->add_option("--multi-face", so.multi_face, "Two-face videos when no spec is given")->capture_default_str();
  synth->add_option("--frames", so.frames, "Frames per video");
  synth->add_option("--height", so.height, "Frame height");
  synth->add_option("--width", so.width, "Frame width");

  BuildOptions bo;
  auto* build = app.add_subcommand("build-dataset", "Clip, crop, build face pools, filter, and write the manifest");
  build->add_option("--in", bo.in, "Corpus directory")->capture_default_str();
  build->add_option("--out", bo.out, "Dataset output directory")->capture_default_str();
  build->add_option("--clip-length", bo.clip_length, "Frames per clip (full 16, ci 8)");
  build->add_option("--size", bo.size, "Clip side in pixels (full 512, ci 64)");
  build->add_option("--pool-target", bo.pool_target, "Crops per face pool (full 5, ci 3)");
  build->add_option("--ref-size", bo.ref_size, "Face crop side in pixels (full 224, ci 32)");

  CaptionCliOptions co;
  auto* caption = app.add_subcommand("caption", "Attribute, action, and unified captions for every record");
  caption->add_option("--manifest", co.manifest, "Manifest to caption in place")->capture_default_str();
  caption->add_option("--endpoints", co.endpoints, "Endpoint config JSON {attribute, action, unifier}")->required();
  caption->add_option("--quarantine", co.quarantine, "Quarantine JSONL (default next to the manifest)");
  caption->add_option("--concurrency", co.concurrency, "Maximum in-flight client requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  TrainCliOptions to;
  auto* train = app.add_subcommand("train", "Train the face adapter against the frozen backbone");
  train->add_option("--manifest", to.manifest, "Captioned manifest")->capture_default_str();
  train->add_option("--config", to.config, "Train config JSON; flags override it");
  train->add_option("--out", to.out, "Run directory (checkpoints/, metrics.jsonl)")->capture_default_str();
  train->add_option("--steps", to.steps, "Optimizer steps");
  train->add_option("--batch-size", to.batch_size, "Samples per step (default 2)");
  train->add_option("--lr", to.lr, "Learning rate (default 1e-4)");
  train->add_option("--null-text-prob", to.null_text_prob, "Probability of the null text embedding (default 0.2)");
  train->add_option("--lambda", to.lambda, "Image-branch weight during training (default 1.0)");
  train->add_option("--checkpoint-every", to.checkpoint_every, "Steps between checkpoints (default 25)");
  train->add_option("--resume", to.resume, "Resume from checkpoint step N or 'latest'");
  train->add_option("--stop-after", to.stop_after, "Stop after this many total steps (simulated interruption)");

  GenerateOptions go;
  auto* gen = app.add_subcommand("generate", "Sample a video, optionally conditioned on reference faces");
  gen->add_option("--checkpoint", go.checkpoint, "Adapter checkpoint");
  gen->add_option("--config", go.config, "GenerationConfig JSON; flags override it");
  gen->add_option("--prompt", go.prompt, "Text prompt");
  gen->add_option("--ref", go.refs, "Reference face image (PNG); repeat for several identities");
  gen->add_option("--mix", go.mix, "Mixing weight per --ref");
  gen->add_option("--lambda", go.lambda, "Image-branch weight (default 1.0)");
  gen->add_option("--scale", go.scale, "Classifier-free guidance scale (default 7.5)");
  gen->add_option("--frames", go.frames, "Frames to generate (default 16)");
  gen->add_option("--steps", go.steps, "Sampling steps (default 25)");
  gen->add_option("--out", go.out, "Output directory for frame PNGs and preview.gif")->capture_default_str();
  gen->add_flag("--no-gif", go.no_gif, "Skip the GIF preview");

  std::string inspect_target;
  auto* inspect = app.add_subcommand("inspect", "Summarize and validate a manifest, pool, checkpoint, or clip");
  inspect->add_option("path", inspect_target, "File or pool directory")->required();

  std::vector<std::string> argv_store{"idkit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  configure_logging(g, err);
  try {
    const Context ctx{resolve_data_root(g.data_root.empty() ? std::nullopt : std::optional(g.data_root)), g, out,
                      err};
    fs::create_directories(ctx.root);
    if (synth->parsed()) cmd_synth_corpus(ctx, so);
    if (build->parsed()) cmd_build_dataset(ctx, bo);
    if (caption->parsed()) cmd_caption(ctx, co);
    if (train->parsed()) cmd_train(ctx, to);
    if (gen->parsed()) cmd_generate(ctx, go, gen->help());
    if (inspect->parsed()) cmd_inspect(ctx, inspect_target);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace idkit::cli
