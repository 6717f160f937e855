#include "fpp/config.hpp"

#include <algorithm>
#include <sstream>

#include "fpp/io.hpp"

namespace fpp::cfg {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line, section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    kv.entries_.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  return parse(io::read_text_file(path));
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section) {
      section = sec;
      out << '[' << section << "]\n";
    }
    out << name << " = " << value << '\n';
  }
  return out.str();
}

const std::string* KeyValueConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

bool KeyValueConfig::has(const std::string& key) const { return find(key) != nullptr; }

std::string KeyValueConfig::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw std::invalid_argument("config is missing required key: " + key);
  return *v;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return std::stod(get_string(key));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? std::stod(*v) : fallback;
}

int KeyValueConfig::get_int(const std::string& key) const {
  return std::stoi(get_string(key));
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  return v ? std::stoi(*v) : fallback;
}

std::uint64_t KeyValueConfig::get_seed(const std::string& key) const {
  return static_cast<std::uint64_t>(std::stoull(get_string(key)));
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw std::invalid_argument("config key " + key + " must be true/false");
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
  std::istringstream ss(get_string(key));
  std::vector<int> out;
  int v;
  while (ss >> v) out.push_back(v);
  if (out.empty())
    throw std::invalid_argument("config key " + key + " must list integers");
  return out;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

namespace {

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

RunConfig RunConfig::from_kv(const KeyValueConfig& kv) {
  RunConfig c;
  c.geometry.projector_width = kv.get_int("geometry.projector_width", 684);
  c.geometry.projector_height = kv.get_int("geometry.projector_height", 608);
  c.geometry.camera_width = kv.get_int("geometry.camera_width", 128);
  c.geometry.camera_height = kv.get_int("geometry.camera_height", 128);
  c.geometry.height_coeff = kv.get_double("geometry.height_coeff", 10.0);
  c.geometry.reference_offset = kv.get_double("geometry.reference_offset", 0.0);
  c.geometry.pixel_pitch = kv.get_double("geometry.pixel_pitch", 0.1);
  c.geometry.usable_margin = kv.get_double("geometry.usable_margin", 0.125);

  c.frequencies.periods = kv.get_int_list("frequencies.periods");
  c.frequencies.validate();
  c.geometry.period_number = c.frequencies.periods.back();
  c.geometry.validate();
  c.n_steps = kv.get_int("render.n_steps", 4);

  const int scene_count = kv.get_int("scenes.count", 0);
  for (int i = 0; i < scene_count; ++i) {
    const std::string prefix = "scenes." + std::to_string(i) + ".";
    sim::SceneRequest req;
    req.id = kv.get_string(prefix + "id", "scene_" + std::to_string(i));
    req.kind = scene_kind_from_string(kv.get_string(prefix + "kind", "plane"));
    req.split = kv.get_string(prefix + "split", "train");
    req.params.z0 = kv.get_double(prefix + "z0", 0.0);
    req.params.radius = kv.get_double(prefix + "radius", 5.0);
    req.params.step_height = kv.get_double(prefix + "step_height", 2.0);
    req.params.blob_count = kv.get_int(prefix + "blob_count", 3);
    req.params.low_reflectivity = kv.get_double(prefix + "low_reflectivity", 0.02);
    req.params.blur_length = kv.get_int(prefix + "blur_length", 5);
    req.params.noise_sigma = kv.get_double(prefix + "noise_sigma", 0.0);
    req.params.quantize = kv.get_bool(prefix + "quantize", false);
    c.scenes.push_back(std::move(req));
  }

  c.network.channels = kv.has("network.channels")
                           ? kv.get_int_list("network.channels")
                           : std::vector<int>{8, 16, 32};
  c.network.kernel_size = kv.get_int("network.kernel_size", 3);
  c.network.depth = kv.get_int("network.depth", 2);
  c.network.downsample_levels = kv.get_int("network.downsample_levels", 2);
  c.network.activation = nn::activation_from_string(
      kv.get_string("network.activation", "leaky_relu"));
  c.network.in_channels = kv.get_int("network.in_channels", 1);
  c.network.validate();

  c.schedule.stage1_epochs = kv.get_int("train.stage1_epochs", 20);
  c.schedule.stage2_epochs = kv.get_int("train.stage2_epochs", 20);
  c.schedule.stage1_lr = kv.get_double("train.stage1_lr", 5e-4);
  c.schedule.stage2_lr = kv.get_double("train.stage2_lr", 1e-5);
  c.weight_decay = kv.get_double("train.weight_decay", 1e-4);
  c.two_channel_input = kv.get_bool("train.two_channel_input", false);
  c.circular_high = kv.get_bool("train.circular_high", true);
  c.circular_low = kv.get_bool("train.circular_low", true);

  c.weights.w1 = kv.get_double("loss.w1", 1.0);
  c.weights.w2 = kv.get_double("loss.w2", 2.0);
  c.weights.validate();

  c.preprocess.modulation_threshold =
      kv.get_double("preprocess.modulation_threshold", 4.0);
  c.preprocess.min_area_fraction =
      kv.get_double("preprocess.min_area_fraction", 0.01);

  c.valid_range.first = kv.get_double("eval.valid_range_min", -50.0);
  c.valid_range.second = kv.get_double("eval.valid_range_max", 50.0);

  // Seeds are explicit by contract: no entropy defaults.
  c.dataset_seed = kv.get_seed("seeds.dataset");
  c.train_seed = kv.get_seed("seeds.train");

  c.dataset_dir = kv.get_string("paths.dataset_dir", "");
  c.model_dir = kv.get_string("paths.model_dir", "");

  if (c.two_channel_input && c.network.in_channels != 2)
    throw std::invalid_argument(
        "two_channel_input requires network.in_channels = 2");
  return c;
}

KeyValueConfig RunConfig::to_kv() const {
  KeyValueConfig kv;
  auto seti = [&](const std::string& k, long long v) { kv.set(k, std::to_string(v)); };
  auto setd = [&](const std::string& k, double v) { kv.set(k, format_double(v)); };
  auto setb = [&](const std::string& k, bool v) { kv.set(k, v ? "true" : "false"); };

  seti("geometry.projector_width", geometry.projector_width);
  seti("geometry.projector_height", geometry.projector_height);
  seti("geometry.camera_width", geometry.camera_width);
  seti("geometry.camera_height", geometry.camera_height);
  setd("geometry.height_coeff", geometry.height_coeff);
  setd("geometry.reference_offset", geometry.reference_offset);
  setd("geometry.pixel_pitch", geometry.pixel_pitch);
  setd("geometry.usable_margin", geometry.usable_margin);

  {
    std::ostringstream ss;
    for (std::size_t i = 0; i < frequencies.periods.size(); ++i)
      ss << (i ? " " : "") << frequencies.periods[i];
    kv.set("frequencies.periods", ss.str());
  }
  seti("render.n_steps", n_steps);

  seti("scenes.count", static_cast<long long>(scenes.size()));
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const std::string prefix = "scenes." + std::to_string(i) + ".";
    const sim::SceneRequest& req = scenes[i];
    kv.set(prefix + "id", req.id);
    kv.set(prefix + "kind", to_string(req.kind));
    kv.set(prefix + "split", req.split);
    setd(prefix + "z0", req.params.z0);
    setd(prefix + "radius", req.params.radius);
    setd(prefix + "step_height", req.params.step_height);
    seti(prefix + "blob_count", req.params.blob_count);
    setd(prefix + "low_reflectivity", req.params.low_reflectivity);
    seti(prefix + "blur_length", req.params.blur_length);
    setd(prefix + "noise_sigma", req.params.noise_sigma);
    setb(prefix + "quantize", req.params.quantize);
  }

  {
    std::ostringstream ss;
    for (std::size_t i = 0; i < network.channels.size(); ++i)
      ss << (i ? " " : "") << network.channels[i];
    kv.set("network.channels", ss.str());
  }
  seti("network.kernel_size", network.kernel_size);
  seti("network.depth", network.depth);
  seti("network.downsample_levels", network.downsample_levels);
  kv.set("network.activation", nn::to_string(network.activation));
  seti("network.in_channels", network.in_channels);

  seti("train.stage1_epochs", schedule.stage1_epochs);
  seti("train.stage2_epochs", schedule.stage2_epochs);
  setd("train.stage1_lr", schedule.stage1_lr);
  setd("train.stage2_lr", schedule.stage2_lr);
  setd("train.weight_decay", weight_decay);
  setb("train.two_channel_input", two_channel_input);
  setb("train.circular_high", circular_high);
  setb("train.circular_low", circular_low);

  setd("loss.w1", weights.w1);
  setd("loss.w2", weights.w2);

  setd("preprocess.modulation_threshold", preprocess.modulation_threshold);
  setd("preprocess.min_area_fraction", preprocess.min_area_fraction);

  setd("eval.valid_range_min", valid_range.first);
  setd("eval.valid_range_max", valid_range.second);

  kv.set("seeds.dataset", std::to_string(dataset_seed));
  kv.set("seeds.train", std::to_string(train_seed));

  kv.set("paths.dataset_dir", dataset_dir);
  kv.set("paths.model_dir", model_dir);
  return kv;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  return from_kv(KeyValueConfig::load(path));
}

nn::TrainOptions RunConfig::train_options() const {
  nn::TrainOptions options;
  options.weights = weights;
  options.two_channel_input = two_channel_input;
  options.circular_high = circular_high;
  options.circular_low = circular_low;
  options.weight_decay = weight_decay;
  options.seed = train_seed;
  return options;
}

}  // namespace fpp::cfg
