#include "heatgait/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "heatgait/errors.hpp"
#include "json.hpp"

namespace heatgait {

std::string condition_name(Condition c) {
  switch (c) {
    case Condition::NM: return "NM";
    case Condition::BG: return "BG";
    case Condition::CL: return "CL";
  }
  return "NM";
}

Condition condition_from_name(const std::string& name) {
  if (name == "NM") return Condition::NM;
  if (name == "BG") return Condition::BG;
  if (name == "CL") return Condition::CL;
  throw SchemaError("unknown condition \"" + name + "\"");
}

bool is_valid_view_angle(int angle) {
  return std::find(kViewAngles.begin(), kViewAngles.end(), angle) !=
         kViewAngles.end();
}

double mean_confidence(const PoseFrame& frame) {
  double sum = 0.0;
  for (const Keypoint& kp : frame.keypoints) sum += kp.confidence;
  return sum / coco::kNumJoints;
}

PoseSequence filter_low_confidence(const PoseSequence& seq, double threshold) {
  if (threshold < 0.0 || threshold > 1.0) {
    throw std::invalid_argument("filter_low_confidence: threshold outside [0,1]");
  }
  PoseSequence out = seq;
  out.frames.clear();
  for (const PoseFrame& frame : seq.frames) {
    if (mean_confidence(frame) >= threshold) out.frames.push_back(frame);
  }
  if (out.frames.empty()) {
    throw EmptySequenceError("filter_low_confidence: no frames survive for subject " +
                             seq.subject_id);
  }
  return out;
}

PoseSequence normalize_coordinates(const PoseSequence& seq) {
  if (seq.frames.empty()) {
    throw std::invalid_argument("normalize_coordinates: empty sequence");
  }
  double sum_x = 0.0, sum_y = 0.0;
  const double count = static_cast<double>(seq.frames.size()) * coco::kNumJoints;
  for (const PoseFrame& frame : seq.frames) {
    for (const Keypoint& kp : frame.keypoints) {
      sum_x += kp.x;
      sum_y += kp.y;
    }
  }
  const double mean_x = sum_x / count;
  const double mean_y = sum_y / count;

  double sq = 0.0;
  for (const PoseFrame& frame : seq.frames) {
    for (const Keypoint& kp : frame.keypoints) {
      const double dx = kp.x - mean_x;
      const double dy = kp.y - mean_y;
      sq += dx * dx + dy * dy;
    }
  }
  const double std_dev = std::sqrt(sq / (2.0 * count));
  if (std_dev < 1e-9) {
    throw DegenerateSequenceError(
        "normalize_coordinates: coincident joints, spread below 1e-9");
  }

  PoseSequence out = seq;
  for (PoseFrame& frame : out.frames) {
    for (Keypoint& kp : frame.keypoints) {
      kp.x = (kp.x - mean_x) / std_dev;
      kp.y = (kp.y - mean_y) / std_dev;
    }
  }
  return out;
}

PoseSequence fixed_length(const PoseSequence& seq, int target, WindowMode mode,
                          Rng* rng) {
  if (target <= 0) throw std::invalid_argument("fixed_length: target must be > 0");
  if (seq.frames.empty()) {
    throw std::invalid_argument("fixed_length: empty sequence");
  }
  const int n = static_cast<int>(seq.frames.size());
  PoseSequence out = seq;
  out.frames.clear();
  out.frames.reserve(target);

  if (n >= target) {
    int start = (n - target) / 2;
    if (mode == WindowMode::Train && rng != nullptr && n > target) {
      start = rng->uniform_int(0, n - target);
    }
    out.frames.assign(seq.frames.begin() + start,
                      seq.frames.begin() + start + target);
  } else {
    out.frames = seq.frames;
    while (static_cast<int>(out.frames.size()) < target) {
      out.frames.push_back(seq.frames.back());
    }
  }
  return out;
}

DatasetSplit split_by_subject(const std::vector<PoseSequence>& sequences,
                              const std::array<double, 3>& ratios,
                              std::uint64_t seed) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split_by_subject: ratios must sum to 1");
  }

  std::set<std::string> subject_set;
  for (const PoseSequence& seq : sequences) subject_set.insert(seq.subject_id);
  std::vector<std::string> subjects(subject_set.begin(), subject_set.end());

  Rng rng(derive_seed(seed, 0x5b117ull));
  shuffle(subjects, rng);

  const int n = static_cast<int>(subjects.size());
  const int n_train = static_cast<int>(std::floor(n * ratios[0]));
  const int n_val = static_cast<int>(std::floor(n * ratios[1]));
  const int n_test = n - n_train - n_val;
  if (n_train <= 0 || n_val <= 0 || n_test <= 0) {
    throw TooFewSubjectsError("split_by_subject: a part would be empty with " +
                              std::to_string(n) + " subjects");
  }

  std::map<std::string, int> part_of;
  for (int i = 0; i < n; ++i) {
    part_of[subjects[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
  }

  DatasetSplit split;
  for (const PoseSequence& seq : sequences) {
    switch (part_of.at(seq.subject_id)) {
      case 0: split.train.push_back(seq); break;
      case 1: split.validation.push_back(seq); break;
      default: split.test.push_back(seq); break;
    }
  }
  return split;
}

namespace {

PoseSequence sequence_from_json(const nlohmann::json& record,
                                const std::string& where) {
  for (const char* key : {"subject", "condition", "seq", "angle", "frames"}) {
    if (!record.contains(key)) {
      throw SchemaError(where + ": missing key \"" + key + "\"");
    }
  }
  PoseSequence seq;
  seq.subject_id = record.at("subject").get<std::string>();
  seq.condition = condition_from_name(record.at("condition").get<std::string>());
  seq.sequence_index = record.at("seq").get<int>();
  if (seq.sequence_index < 1) {
    throw SchemaError(where + ": seq must be >= 1");
  }
  seq.view_angle = record.at("angle").get<int>();
  if (!is_valid_view_angle(seq.view_angle)) {
    throw SchemaError(where + ": angle " + std::to_string(seq.view_angle) +
                      " is not one of the 11 views");
  }

  const auto& frames = record.at("frames");
  if (!frames.is_array() || frames.empty()) {
    throw SchemaError(where + ": frames must be a non-empty array");
  }
  seq.frames.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto& joints = frames[f];
    if (!joints.is_array() ||
        joints.size() != static_cast<std::size_t>(coco::kNumJoints)) {
      throw SchemaError(where + ": frame " + std::to_string(f) + " has " +
                        std::to_string(joints.size()) + " keypoints, expected " +
                        std::to_string(coco::kNumJoints));
    }
    PoseFrame frame;
    for (std::size_t j = 0; j < joints.size(); ++j) {
      const auto& kp = joints[j];
      if (!kp.is_array() || kp.size() != 3) {
        throw SchemaError(where + ": frame " + std::to_string(f) + " joint " +
                          std::to_string(j) + " must be [x, y, c]");
      }
      frame.keypoints[j].x = kp[0].get<double>();
      frame.keypoints[j].y = kp[1].get<double>();
      frame.keypoints[j].confidence = kp[2].get<double>();
      if (!std::isfinite(frame.keypoints[j].x) ||
          !std::isfinite(frame.keypoints[j].y)) {
        throw SchemaError(where + ": non-finite coordinate at frame " +
                          std::to_string(f));
      }
      const double c = frame.keypoints[j].confidence;
      if (!(c >= 0.0 && c <= 1.0)) {
        throw SchemaError(where + ": confidence outside [0,1] at frame " +
                          std::to_string(f));
      }
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

}  // namespace

std::vector<PoseSequence> load_keypoint_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());

  std::vector<PoseSequence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.filename().string() + ":" +
                              std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    out.push_back(sequence_from_json(record, where));
  }
  return out;
}

void save_keypoint_file(const std::vector<PoseSequence>& sequences,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open " + path.string() + " for writing");
  for (const PoseSequence& seq : sequences) {
    nlohmann::json frames = nlohmann::json::array();
    for (const PoseFrame& frame : seq.frames) {
      nlohmann::json joints = nlohmann::json::array();
      for (const Keypoint& kp : frame.keypoints) {
        joints.push_back({kp.x, kp.y, kp.confidence});
      }
      frames.push_back(std::move(joints));
    }
    nlohmann::json record = {{"subject", seq.subject_id},
                             {"condition", condition_name(seq.condition)},
                             {"seq", seq.sequence_index},
                             {"angle", seq.view_angle},
                             {"frames", std::move(frames)}};
    out << record.dump() << "\n";
  }
}

std::vector<PoseSequence> load_keypoint_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<PoseSequence> out;
  for (const auto& file : files) {
    std::vector<PoseSequence> seqs = load_keypoint_file(file);
    out.insert(out.end(), std::make_move_iterator(seqs.begin()),
               std::make_move_iterator(seqs.end()));
  }
  return out;
}

}  // namespace heatgait
