#pragma once

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "salgate/errors.hpp"
#include "salgate/image.hpp"

namespace salgate {

// Binary PGM (P5), maxval 255. The only raster format the toolkit speaks.

inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    img.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure("cannot open for writing: " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size()));
    if (!out)
        throw IoFailure("write failed: " + path.string());
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open for reading: " + path.string());

    auto skip_space_and_comments = [&in]() {
        int c;
        while ((c = in.peek()) != EOF) {
            if (c == '#') {
                std::string rest;
                std::getline(in, rest);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
    };
    auto next_token = [&in, &skip_space_and_comments](const std::filesystem::path& p) {
        skip_space_and_comments();
        std::string t;
        int c;
        while ((c = in.peek()) != EOF && !std::isspace(c))
            t.push_back(static_cast<char>(in.get()));
        if (t.empty())
            throw MalformedImage("truncated PGM header: " + p.string());
        return t;
    };
    auto parse_int = [](const std::string& t, const std::filesystem::path& p) {
        for (char c : t)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw MalformedImage("bad PGM header token '" + t + "': " + p.string());
        return std::stoi(t);
    };

    if (next_token(path) != "P5")
        throw MalformedImage("not a binary PGM (P5): " + path.string());
    const int width = parse_int(next_token(path), path);
    const int height = parse_int(next_token(path), path);
    const int maxval = parse_int(next_token(path), path);
    if (width < 1 || height < 1)
        throw MalformedImage("bad PGM dimensions: " + path.string());
    if (maxval != 255)
        throw MalformedImage("unsupported PGM maxval (need 255): " + path.string());
    in.get(); // single whitespace byte before the raster

    GrayImage img;
    img.width = width;
    img.height = height;
    img.data.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    in.read(reinterpret_cast<char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
        throw MalformedImage("truncated PGM raster: " + path.string());
    return img;
}

// Saliency maps are stored as 8-bit PGM; byte v encodes the value v/255.

inline void write_saliency_pgm(const SaliencyMap& s, const std::filesystem::path& path) {
    s.validate();
    GrayImage img;
    img.width = s.width;
    img.height = s.height;
    img.data.resize(s.data.size());
    for (std::size_t i = 0; i < s.data.size(); ++i)
        img.data[i] = static_cast<std::uint8_t>(std::lround(s.data[i] * 255.0));
    write_pgm(img, path);
}

inline SaliencyMap read_saliency_pgm(const std::filesystem::path& path) {
    const GrayImage img = read_pgm(path);
    SaliencyMap s;
    s.width = img.width;
    s.height = img.height;
    s.data.resize(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i)
        s.data[i] = img.data[i] / 255.0;
    return s;
}

} // namespace salgate
