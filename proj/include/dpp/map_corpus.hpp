#pragma once

#include <map>
#include <string>

namespace dpp {

// Built-in gridworld corpus. Training maps are 8x8 and 16x16; validation
// maps are unseen layouts of the same sizes; the 32x32 maps exercise
// size transfer and the 5x5 maps keep oracle enumeration cheap.
inline const std::map<std::string, std::string>& builtin_maps() {
  static const std::map<std::string, std::string> maps = [] {
    std::map<std::string, std::string> m;

    m["train8_open"] =
        "........\n"
        "........\n"
        "........\n"
        "........\n"
        "........\n"
        "........\n"
        "........\n"
        "........\n";

    m["train8_blocks"] =
        "........\n"
        "..##....\n"
        "..##....\n"
        "........\n"
        "....##..\n"
        "....##..\n"
        "........\n"
        "........\n";

    m["train8_bars"] =
        "........\n"
        ".######.\n"
        "........\n"
        ".##..##.\n"
        "........\n"
        ".######.\n"
        "........\n"
        "........\n";

    m["val8_corner"] =
        "........\n"
        "........\n"
        "..###...\n"
        "..#.....\n"
        "..#..##.\n"
        ".....##.\n"
        "........\n"
        "........\n";

    m["train16_open"] =
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n"
        "................\n";

    m["train16_blocks"] =
        "................\n"
        "..##......##....\n"
        "..##......##....\n"
        "................\n"
        "......##........\n"
        "......##........\n"
        "................\n"
        ".##........##...\n"
        ".##........##...\n"
        "................\n"
        "....##....##....\n"
        "....##....##....\n"
        "................\n"
        "..........##....\n"
        "..##......##....\n"
        "................\n";

    m["train16_rooms"] =
        "................\n"
        ".#####....#####.\n"
        ".#............#.\n"
        ".#............#.\n"
        ".#####....#####.\n"
        "................\n"
        "................\n"
        "....########....\n"
        "....#......#....\n"
        "....#......#....\n"
        "....##....##....\n"
        "................\n"
        ".#####....#####.\n"
        ".#............#.\n"
        ".#............#.\n"
        "................\n";

    m["val16_maze"] =
        "................\n"
        "......#.........\n"
        "..###.#.####....\n"
        "....#.#....#....\n"
        "....#.#....#....\n"
        "....#.######....\n"
        "....#...........\n"
        "....#####.####..\n"
        "..........#.....\n"
        ".######...#.....\n"
        "......#...#.....\n"
        "......#...#.....\n"
        "..#...#####.....\n"
        "..#.............\n"
        "..#######.......\n"
        "................\n";

    const auto open_map = [](int n) {
      std::string text;
      for (int r = 0; r < n; ++r) {
        text.append(static_cast<std::size_t>(n), '.');
        text.push_back('\n');
      }
      return text;
    };

    const auto set_cell = [](std::string& text, int n, int r, int c) {
      text[static_cast<std::size_t>(r) * static_cast<std::size_t>(n + 1) +
           static_cast<std::size_t>(c)] = '#';
    };

    m["eval32_open"] = open_map(32);

    {
      // 3x3 blocks on a staggered lattice
      std::string text = open_map(32);
      for (int br = 0; br < 5; ++br) {
        for (int bc = 0; bc < 5; ++bc) {
          const int r0 = 3 + br * 6;
          const int c0 = 3 + bc * 6 + (br % 2) * 2;
          for (int r = r0; r < r0 + 3 && r < 31; ++r) {
            for (int c = c0; c < c0 + 3 && c < 31; ++c) {
              set_cell(text, 32, r, c);
            }
          }
        }
      }
      m["eval32_blocks"] = text;
    }

    {
      // long horizontal walls with alternating door positions
      std::string text = open_map(32);
      for (int band = 0; band < 5; ++band) {
        const int r = 5 + band * 5;
        const int door = (band % 2 == 0) ? 26 : 5;
        for (int c = 1; c < 31; ++c) {
          if (c < door - 1 || c > door + 1) set_cell(text, 32, r, c);
        }
      }
      m["eval32_bars"] = text;
    }

    m["open5"] =
        ".....\n"
        ".....\n"
        ".....\n"
        ".....\n"
        ".....\n";

    m["wall5"] =
        ".....\n"
        "..#..\n"
        "..#..\n"
        ".....\n"
        ".....\n";

    m["open3"] =
        "...\n"
        "...\n"
        "...\n";

    return m;
  }();
  return maps;
}

}  // namespace dpp
