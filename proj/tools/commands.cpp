#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "cnc/datasets.hpp"
#include "cnc/eval.hpp"
#include "cnc/format.hpp"
#include "cnc/io.hpp"
#include "cnc/polytope.hpp"
#include "cnc/severity.hpp"
#include "cnc/svg.hpp"

namespace cnc::cli {
namespace fs = std::filesystem;

namespace {

fs::path in_output(const ExperimentConfig& cfg, const std::string& p) {
  const fs::path q(p);
  return q.is_absolute() ? q : cfg.output_dir / q;
}

void write_resolved(const ExperimentConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / (command + ".config.yaml"), emit_config(cfg));
}

LabeledImageSet load_images(const std::vector<std::string>& files, int limit, int downsample_factor) {
  LabeledImageSet set;
  set.class_count = 10;
  for (const std::string& f : files) {
    LabeledImageSet part = load_cifar10_binary(f);
    for (std::size_t i = 0; i < part.size(); ++i) {
      if (limit > 0 && set.size() >= static_cast<std::size_t>(limit)) break;
      set.images.push_back(downsample(part.images[i], downsample_factor));
      set.labels.push_back(part.labels[i]);
    }
  }
  if (set.size() == 0) {
    throw std::runtime_error("no images loaded");
  }
  return set;
}

Point2Dataset toy(const DatasetSpec& d, int n_per_class, RngStream rng) {
  if (d.kind == "two_moons") {
    return two_moons(n_per_class, d.noise, rng);
  }
  const auto centers = d.classes == 4 ? square_corner_centers(d.side) : circle_centers(d.classes, d.side / std::sqrt(2.0));
  return gaussian_clusters_2d(d.classes, n_per_class, centers, d.sigma, rng);
}

MlpModel load_model(const fs::path& p, const Data& data) {
  MlpModel m = load_checkpoint(p);
  if (m.input_dim() != data.input_dim()) {
    throw std::runtime_error(p.string() + ": model expects " + std::to_string(m.input_dim()) + " inputs, data has " +
                             std::to_string(data.input_dim()));
  }
  const int k = data.class_count();
  if (m.output_dim() != k && m.output_dim() != k + 1) {
    throw std::runtime_error(p.string() + ": model has " + std::to_string(m.output_dim()) + " outputs, data has " +
                             std::to_string(k) + " classes");
  }
  return m;
}

GenConfig gen_for(const ExperimentConfig& cfg, Variant v) {
  GenConfig g = cfg.gen;
  g.variant = v;
  g.seed = derive_seeds(cfg.seed).gen;
  return g;
}

TrainConfig train_for(const ExperimentConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = derive_seeds(cfg.seed).train;
  return t;
}

/// OOD synthesis over the whole training set, as one batch.
Data synthesize(const Data& data, const GenConfig& g, const RngStream& rng, const SeverityTable& table) {
  Data out;
  out.planar = data.planar;
  if (data.planar) {
    out.points = cnc_datagen_2d(data.points, g, rng, data.points.centroid(), table);
  } else {
    out.images = cnc_datagen(data.images, g, rng, table);
  }
  return out;
}

std::string roc_svg(const ScoreSet& scores, double auc) {
  const auto pts = roc_curve(scores);
  const double size = 360.0;
  const double margin = 50.0;
  svg::Document doc(size + 2 * margin, size + 2 * margin);
  svg::Viewport vp{{0.0, 0.0, 1.0, 1.0}, size, size, margin, margin};
  doc.rect(margin, margin, size, size, "fill=\"none\" stroke=\"#000000\"");
  doc.polyline(vp, {{0.0, 0.0}, {1.0, 1.0}}, "fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 4\"");
  std::vector<Point2> curve;
  curve.reserve(pts.size());
  for (const auto& [fpr, tpr] : pts) curve.push_back({fpr, tpr});
  doc.polyline(vp, curve, "fill=\"none\" stroke=\"#377eb8\" stroke-width=\"2\"");
  doc.text(margin + size / 2 - 60, margin + size + 35, "OOD accepted (FPR)");
  doc.text(8, margin - 12, "ID accepted (TPR)");
  doc.text(margin + size - 130, margin + size - 12, "AUROC " + fmt_fixed(auc, 4));
  return doc.str();
}

std::string points_csv(const Point2Dataset& ds) {
  std::string out = csv_row({"x", "y", "label"});
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out += csv_row({fmt_double(ds.points[i].x), fmt_double(ds.points[i].y), std::to_string(ds.labels[i])});
  }
  return out;
}

std::string sample_name(std::size_t i, const char* ext) {
  std::string n = std::to_string(i);
  return "sample_" + std::string(6 - std::min<std::size_t>(6, n.size()), '0') + n + ext;
}

}  // namespace

int Data::input_dim() const {
  if (planar) return 2;
  const ImageTensor& t = images.images.front();
  return t.width() * t.height() * t.channels();
}

Data load_train_data(const ExperimentConfig& cfg) {
  Data d;
  d.planar = cfg.dataset.planar();
  if (d.planar) {
    d.points = toy(cfg.dataset, cfg.dataset.n_per_class, derive_seeds(cfg.seed).data);
  } else {
    d.images = load_images(cfg.dataset.files, cfg.dataset.limit, cfg.dataset.downsample);
  }
  return d;
}

Data load_test_data(const ExperimentConfig& cfg) {
  Data d;
  d.planar = cfg.dataset.planar();
  if (d.planar) {
    d.points = toy(cfg.dataset, cfg.dataset.test_n_per_class, derive_seeds(cfg.seed).test_data);
  } else {
    const auto& files = cfg.dataset.test_files.empty() ? cfg.dataset.files : cfg.dataset.test_files;
    d.images = load_images(files, cfg.dataset.limit, cfg.dataset.downsample);
  }
  return d;
}

SeverityTable load_severity_table(const ExperimentConfig& cfg) {
  if (cfg.severity_table.empty()) return SeverityTable::defaults();
  return SeverityTable::parse(read_file(cfg.severity_table));
}

std::vector<int> model_dims(const ExperimentConfig& cfg, const Data& data, Variant variant) {
  std::vector<int> dims{data.input_dim()};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(variant == Variant::none ? data.class_count() : data.class_count() + 1);
  return dims;
}

void cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.gen.variant == Variant::none) {
    throw ConfigError("generate: generation.variant 'none' produces no samples");
  }
  const Data all = load_train_data(cfg);
  const SeverityTable table = load_severity_table(cfg);
  const std::size_t count = cfg.generate.count > 0 ? std::min<std::size_t>(cfg.generate.count, all.size()) : all.size();
  // Evenly strided subset, so every class stays represented.
  Data data;
  data.planar = all.planar;
  data.points.class_count = all.points.class_count;
  data.images.class_count = all.images.class_count;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i * all.size() / count;
    if (data.planar) {
      data.points.points.push_back(all.points.points[j]);
      data.points.labels.push_back(all.points.labels[j]);
    } else {
      data.images.images.push_back(all.images.images[j]);
      data.images.labels.push_back(all.images.labels[j]);
    }
  }
  const Data out = synthesize(data, gen_for(cfg, cfg.gen.variant), derive_seeds(cfg.seed).generate, table);
  write_resolved(cfg, "generate");
  if (out.planar) {
    write_file(cfg.output_dir / "ood_points.csv", points_csv(out.points));
    write_file(cfg.output_dir / "manifest.txt", "ood_points.csv " + std::to_string(out.size()) + "\n");
  } else {
    const fs::path dir = cfg.output_dir / "ood";
    write_offline_cache(out.images, dir);
    const std::size_t previews = std::min<std::size_t>(static_cast<std::size_t>(cfg.generate.previews), out.size());
    for (std::size_t i = 0; i < previews; ++i) {
      export_ppm(out.images.images[i], dir / sample_name(i, ".ppm"));
    }
  }
  log << "generate: " << out.size() << " " << to_string(cfg.gen.variant) << " samples -> " << cfg.output_dir.string()
      << "\n";
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  const Data data = load_train_data(cfg);
  const SeverityTable table = load_severity_table(cfg);
  const Seeds seeds = derive_seeds(cfg.seed);
  const GenConfig gen = gen_for(cfg, cfg.gen.variant);
  MlpModel model = MlpModel::he_init(model_dims(cfg, data, gen.variant), seeds.init);
  const TrainResult r = data.planar ? train(std::move(model), data.points, gen, train_for(cfg), table)
                                    : train(std::move(model), data.images, gen, train_for(cfg), table);
  write_resolved(cfg, "train");
  save_checkpoint(r.model, cfg.output_dir / "model.ckpt");
  std::string hist = csv_row({"epoch", "loss"});
  for (std::size_t e = 0; e < r.loss_history.size(); ++e) {
    hist += csv_row({std::to_string(e), fmt_double(r.loss_history[e])});
  }
  write_file(cfg.output_dir / "loss_history.csv", hist);
  log << "train: " << r.loss_history.size() << " epochs, final loss "
      << (r.loss_history.empty() ? std::string("n/a") : fmt_double(r.loss_history.back())) << " -> "
      << (cfg.output_dir / "model.ckpt").string() << "\n";
}

void cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  const Data train_data = load_train_data(cfg);
  const Data test = load_test_data(cfg);
  const MlpModel model = load_model(in_output(cfg, cfg.eval.checkpoint), test);
  if (model.output_dim() != test.class_count() + 1) {
    throw std::runtime_error("eval: the detector needs a (K+1)-class model; checkpoint has " +
                             std::to_string(model.output_dim()) + " outputs for K = " +
                             std::to_string(test.class_count()));
  }
  const Seeds seeds = derive_seeds(cfg.seed);
  RngStream rng = seeds.eval;
  Batch ood;
  if (test.planar) {
    ood.dim = 2;
    std::vector<Point2> pts;
    if (cfg.eval.ood == "ring") {
      pts = ring_points(train_data.points.centroid(), cfg.eval.ring_factor * rms_spread(train_data.points),
                        cfg.eval.ood_count, rng);
    } else {
      const geom::Box b = geom::Box::around(train_data.points.points, cfg.eval.box_factor);
      pts = box_points(b.x0, b.y0, b.x1, b.y1, cfg.eval.ood_count, rng);
    }
    for (const Point2& p : pts) {
      const double x[2] = {p.x, p.y};
      ood.push(x, test.class_count() + 1);
    }
  } else {
    ood.dim = test.input_dim();
    const ImageTensor& shape = test.images.images.front();
    const SeverityTable table = load_severity_table(cfg);
    const LabeledImageSet files =
        cfg.eval.ood == "files" ? load_images(cfg.eval.ood_files, cfg.eval.ood_count, cfg.dataset.downsample)
                                : LabeledImageSet{};
    for (int i = 0; i < cfg.eval.ood_count; ++i) {
      ImageTensor t;
      if (cfg.eval.ood == "noise") {
        t = ImageTensor(shape.width(), shape.height(), shape.channels());
        for (float& v : t.data()) v = static_cast<float>(rng.uniform());
      } else if (cfg.eval.ood == "corruption") {
        const ImageTensor& src = test.images.images[static_cast<std::size_t>(i) % test.size()];
        t = apply_corruption(src, {cfg.eval.ood_corruption, cfg.eval.ood_severity, rng.child(static_cast<std::uint64_t>(i))},
                             table);
      } else {
        if (static_cast<std::size_t>(i) >= files.size()) break;
        t = files.images[static_cast<std::size_t>(i)];
      }
      const std::vector<double> flat = t.flatten();
      if (static_cast<int>(flat.size()) != ood.dim) {
        throw std::runtime_error("eval: OOD images differ in shape from the ID images");
      }
      ood.push(flat, test.class_count() + 1);
    }
  }

  const Batch id = test.batch();
  std::vector<std::vector<double>> id_probs;
  std::vector<std::vector<double>> ood_probs;
  std::vector<std::vector<double>> ood_logits;
  for (std::size_t i = 0; i < id.size(); ++i) id_probs.push_back(forward(model, id.row(i)).probs);
  for (std::size_t i = 0; i < ood.size(); ++i) {
    ForwardResult fr = forward(model, ood.row(i));
    ood_probs.push_back(std::move(fr.probs));
    ood_logits.push_back(std::move(fr.logits));
  }
  const EvalReport report = evaluate(id_probs, id.labels, ood_probs, ood_logits, cfg.eval.ece_bins);
  ScoreSet scores;
  std::string scores_csv = csv_row({"set", "score"});
  for (const auto& p : id_probs) {
    scores.id_scores.push_back(p.back());
    scores_csv += csv_row({"id", fmt_double(p.back())});
  }
  for (const auto& p : ood_probs) {
    scores.ood_scores.push_back(p.back());
    scores_csv += csv_row({"ood", fmt_double(p.back())});
  }
  write_resolved(cfg, "eval");
  write_file(cfg.output_dir / "eval_report.csv", report_csv(report));
  write_file(cfg.output_dir / "scores.csv", scores_csv);
  write_file(cfg.output_dir / "roc.svg", roc_svg(scores, report.auroc));
  log << report_text(report);
}

void cmd_polytope(const ExperimentConfig& cfg, std::ostream& log) {
  const Data data = load_train_data(cfg);
  if (!data.planar) {
    throw ConfigError("polytope: needs a 2-input dataset (two_moons or clusters)");
  }
  const MlpModel model = load_model(in_output(cfg, cfg.polytope.checkpoint), data);
  const geom::Box domain = geom::Box::around(data.points.points, cfg.polytope.domain_factor);
  const auto regions = enumerate_regions(model, domain);
  const auto cells = decision_cells(regions);
  const int k = data.class_count();
  const auto flags = region_flags(regions, cells, data.points.points, k);
  const double area = id_empty_polytope_area(regions, cells, data.points.points, k, cfg.polytope.metric);
  write_resolved(cfg, "polytope");
  write_file(cfg.output_dir / "regions.csv", regions_csv(regions, flags));
  export_complex_svg(regions, cells, data.points, domain, k, cfg.output_dir / "complex.svg");
  std::size_t empty = 0;
  for (const auto& f : flags) empty += f.id_empty() ? 1 : 0;
  std::string summary = csv_row({"metric", "id_empty_area", "id_empty_regions", "regions", "cells", "domain_x0",
                                 "domain_y0", "domain_x1", "domain_y1", "domain_area"});
  summary += csv_row({to_string(cfg.polytope.metric), fmt_double(area), std::to_string(empty),
                      std::to_string(regions.size()), std::to_string(cells.size()), fmt_double(domain.x0),
                      fmt_double(domain.y0), fmt_double(domain.x1), fmt_double(domain.y1), fmt_double(domain.area())});
  write_file(cfg.output_dir / "polytope.csv", summary);
  log << "polytope: " << regions.size() << " regions, " << cells.size() << " cells, ID-empty area ("
      << to_string(cfg.polytope.metric) << ") " << fmt_double(area) << "\n";
}

void cmd_diversity(const ExperimentConfig& cfg, std::ostream& log) {
  const Data data = load_train_data(cfg);
  const SeverityTable table = load_severity_table(cfg);
  const Seeds seeds = derive_seeds(cfg.seed);
  MlpModel reference;
  write_resolved(cfg, "diversity");
  if (!cfg.diversity.reference_checkpoint.empty()) {
    reference = load_model(in_output(cfg, cfg.diversity.reference_checkpoint), data);
  } else {
    const GenConfig none = gen_for(cfg, Variant::none);
    MlpModel init = MlpModel::he_init(model_dims(cfg, data, Variant::none), seeds.init);
    reference = data.planar ? train(std::move(init), data.points, none, train_for(cfg), table).model
                            : train(std::move(init), data.images, none, train_for(cfg), table).model;
    save_checkpoint(reference, cfg.output_dir / "reference.ckpt");
  }
  const int k = data.class_count();
  std::string csv = csv_row({"variant", "count", "diversity", "entropy"});
  for (Variant v : cfg.diversity.variants) {
    GenConfig g = gen_for(cfg, v);
    if (cfg.diversity.samples > 0) {
      g.ood_ratio = (cfg.diversity.samples + 0.25) / static_cast<double>(data.size());
    } else {
      g.ood_ratio = 1.0;
    }
    const Data out = synthesize(data, g, seeds.diversity.child(static_cast<std::uint64_t>(v)), table);
    const Batch b = out.batch();
    std::vector<std::vector<double>> logits;
    double h = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      ForwardResult fr = forward(reference, b.row(i));
      std::vector<double> head(fr.logits.begin(), fr.logits.begin() + k);
      h += entropy(softmax(head));
      logits.push_back(std::move(head));
    }
    const double div = diversity(logits);
    const double ent = h / static_cast<double>(b.size());
    csv += csv_row({std::string(to_string(v)), std::to_string(b.size()), fmt_double(div), fmt_double(ent)});
    log << "diversity: " << to_string(v) << " diversity " << fmt_fixed(div, 4) << " entropy " << fmt_fixed(ent, 4)
        << "\n";
  }
  write_file(cfg.output_dir / "diversity.csv", csv);
}

void cmd_fig2(const ExperimentConfig& cfg, std::ostream& log) {
  const Data data = load_train_data(cfg);
  if (!data.planar) {
    throw ConfigError("fig2: needs a 2-input dataset (two_moons or clusters)");
  }
  const SeverityTable table = load_severity_table(cfg);
  const Seeds seeds = derive_seeds(cfg.seed);
  const double ratio = (cfg.fig2.samples + 0.25) / static_cast<double>(data.size());
  GenConfig pb = gen_for(cfg, Variant::pbcc_only);
  pb.ood_ratio = ratio;
  GenConfig cn = gen_for(cfg, Variant::cnc);
  cn.ood_ratio = ratio;
  const Point2 center = data.points.centroid();
  const Point2Dataset pbcc = cnc_datagen_2d(data.points, pb, seeds.fig2.child(0), center, table);
  const Point2Dataset cnc = cnc_datagen_2d(data.points, cn, seeds.fig2.child(1), center, table);
  const geom::Polygon hull = geom::convex_hull(data.points.points);

  std::vector<Point2> all = data.points.points;
  all.insert(all.end(), pbcc.points.begin(), pbcc.points.end());
  all.insert(all.end(), cnc.points.begin(), cnc.points.end());
  geom::Box box = geom::Box::around(all, 1.1);
  // Square panels keep the geometry undistorted.
  const double side = std::max(box.width(), box.height());
  const double cx = 0.5 * (box.x0 + box.x1);
  const double cy = 0.5 * (box.y0 + box.y1);
  box = {cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2};

  const double panel = 300.0;
  const double gap = 20.0;
  const double top = 30.0;
  svg::Document doc(3 * panel + 4 * gap, panel + top + gap);
  const char* titles[3] = {"ID training data", "PBCC", "CnC"};
  const Point2Dataset* sets[3] = {nullptr, &pbcc, &cnc};
  std::string csv = csv_row({"panel", "count", "outside_hull"});
  for (int p = 0; p < 3; ++p) {
    const double ox = gap + p * (panel + gap);
    const svg::Viewport vp{box, panel, panel, ox, top};
    doc.rect(ox, top, panel, panel, "fill=\"none\" stroke=\"#000000\"");
    doc.text(ox + 4, top - 10, titles[p]);
    for (std::size_t i = 0; i < data.size(); ++i) {
      doc.circle(vp, data.points.points[i], 1.8, "fill=\"" + svg::class_color(data.points.labels[i], data.class_count()) + "\"");
    }
    doc.polygon(vp, hull, "fill=\"none\" stroke=\"#555555\" stroke-dasharray=\"3 3\"");
    std::size_t outside = 0;
    std::size_t count = data.size();
    if (sets[p] != nullptr) {
      count = sets[p]->size();
      for (const Point2& q : sets[p]->points) {
        outside += geom::contains(hull, q, 1e-9) ? 0 : 1;
        doc.circle(vp, q, 1.2, "fill=\"#e41a1c\" fill-opacity=\"0.6\"");
      }
    }
    csv += csv_row({titles[p], std::to_string(count), std::to_string(outside)});
  }
  write_resolved(cfg, "fig2");
  write_file(cfg.output_dir / "fig2.svg", doc.str());
  write_file(cfg.output_dir / "fig2.csv", csv);
  log << "fig2: " << pbcc.size() << " PBCC and " << cnc.size() << " CnC points -> "
      << (cfg.output_dir / "fig2.svg").string() << "\n";
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"generate", "train", "eval", "polytope", "diversity", "fig2"};
  return names;
}

void run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& log) {
  if (name == "generate") cmd_generate(cfg, log);
  else if (name == "train") cmd_train(cfg, log);
  else if (name == "eval") cmd_eval(cfg, log);
  else if (name == "polytope") cmd_polytope(cfg, log);
  else if (name == "diversity") cmd_diversity(cfg, log);
  else if (name == "fig2") cmd_fig2(cfg, log);
  else throw std::invalid_argument("unknown command '" + name + "'");
}

}  // namespace cnc::cli
