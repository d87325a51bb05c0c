#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "spinphoton/errors.hpp"
#include "spinphoton/experiment.hpp"
#include "spinphoton/units.hpp"

namespace spinphoton {

// Time-tag text format, the contract between simulation and analysis:
// header lines prefixed '#' carry run metadata, then one tag per line:
//   frame_index<TAB>channel<TAB>time_ps<TAB>weight
// A fifth `kind` column carries simulation ground truth unless the stream
// is exported blind. Externally produced data uses the four-column form.

inline void write_tag_stream(std::ostream& os, const TagStream& stream,
                             bool blind = true) {
  os << "# spinphoton-tags v1\n";
  for (const auto& [k, v] : stream.metadata) os << "# " << k << ' ' << v << '\n';
  os << "# columns frame_index channel time_ps weight" << (blind ? "" : " kind")
     << '\n';
  char line[128];
  for (const auto& tag : stream.tags) {
    const char channel = tag.channel == Channel::A ? 'A' : 'B';
    std::snprintf(line, sizeof(line), "%lld\t%c\t%.3f\t%.9g",
                  static_cast<long long>(tag.frame_index), channel,
                  s_to_ps(tag.time_in_frame), tag.weight);
    os << line;
    if (!blind) os << '\t' << to_string(tag.kind);
    os << '\n';
  }
}

inline void write_tag_file(const std::string& path, const TagStream& stream,
                           bool blind = true) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open tag file for writing: " + path);
  write_tag_stream(out, stream, blind);
}

inline TagStream read_tag_stream(std::istream& is) {
  TagStream stream;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(is, line)) {
    ++line_number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key.empty() || key == "spinphoton-tags" || key == "columns") continue;
      std::string value;
      std::getline(hs, value);
      const auto pos = value.find_first_not_of(' ');
      stream.set_meta(key, pos == std::string::npos ? "" : value.substr(pos));
      continue;
    }
    std::istringstream ls(line);
    long long frame = 0;
    std::string channel, kind;
    double time_ps = 0.0, weight = 0.0;
    if (!(ls >> frame >> channel >> time_ps >> weight))
      throw DataError("malformed tag line", line_number);
    if (channel != "A" && channel != "B")
      throw DataError("bad channel '" + channel + "'", line_number);
    if (!(time_ps >= 0.0) || !(weight > 0.0))
      throw DataError("bad time or weight", line_number);
    TimeTag tag;
    tag.frame_index = frame;
    tag.channel = channel == "A" ? Channel::A : Channel::B;
    tag.time_in_frame = ps_to_s(time_ps);
    tag.weight = weight;
    if (ls >> kind) {
      if (kind == "signal") tag.kind = TagKind::Signal;
      else if (kind == "leak") tag.kind = TagKind::Leak;
      else if (kind == "dark") tag.kind = TagKind::Dark;
      else throw DataError("bad tag kind '" + kind + "'", line_number);
    }
    stream.tags.push_back(tag);
  }

  if (const auto* period = stream.find_meta("frame_period_ps"))
    stream.frame_period = ps_to_s(std::stod(*period));
  if (const auto* frames = stream.find_meta("frames"))
    stream.n_frames = std::stoull(*frames);
  if (stream.n_frames == 0 && !stream.tags.empty())
    stream.n_frames = static_cast<std::uint64_t>(stream.tags.back().frame_index) + 1;
  return stream;
}

inline TagStream read_tag_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tag file: " + path);
  return read_tag_stream(in);
}

}  // namespace spinphoton
