#include "tcp.hpp"

#include "kap/error.hpp"
#include "kap/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace kap::cli {

namespace {

// 5-byte header + payload; anything past this is a corrupt peer, not a real
// message (the largest desk-scale round 3 is far below 1 MiB).
constexpr std::uint32_t kMaxPayload = 64u << 20;

[[noreturn]] void throw_errno(const std::string& what) {
    throw Error(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

void set_recv_timeout(int fd) {
    timeval tv{};
    tv.tv_sec = 60;
    setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void send_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        const ssize_t sent = ::send(fd, data, len, MSG_NOSIGNAL);
        if (sent <= 0) throw_errno("send");
        data += sent;
        len -= static_cast<std::size_t>(sent);
    }
}

void recv_all(int fd, std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        const ssize_t got = ::recv(fd, data, len, 0);
        if (got == 0) throw Error(ErrorCode::IoError, "connection closed mid-frame");
        if (got < 0) throw_errno("recv");
        data += got;
        len -= static_cast<std::size_t>(got);
    }
}

} // namespace

TcpConn::TcpConn(int fd) : fd_(fd) { set_recv_timeout(fd_); }

TcpConn::TcpConn(TcpConn&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpConn& TcpConn::operator=(TcpConn&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

TcpConn::~TcpConn() {
    if (fd_ >= 0) ::close(fd_);
}

TcpConn TcpConn::connect(const std::string& host, std::uint16_t port) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port_str = std::to_string(port);
    if (getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || res == nullptr) {
        throw Error(ErrorCode::IoError, "cannot resolve " + host);
    }
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        freeaddrinfo(res);
        throw_errno("socket");
    }
    if (::connect(fd, res->ai_addr, res->ai_addrlen) != 0) {
        freeaddrinfo(res);
        ::close(fd);
        throw_errno("connect");
    }
    freeaddrinfo(res);
    return TcpConn(fd);
}

void TcpConn::send_frame(const Frame& f) {
    const auto encoded = wire::frame_to_bytes(f);
    send_all(fd_, encoded.data(), encoded.size());
}

Frame TcpConn::recv_frame() {
    std::uint8_t header[5];
    recv_all(fd_, header, sizeof(header));
    const std::uint32_t len = (static_cast<std::uint32_t>(header[1]) << 24) |
                              (static_cast<std::uint32_t>(header[2]) << 16) |
                              (static_cast<std::uint32_t>(header[3]) << 8) |
                              static_cast<std::uint32_t>(header[4]);
    if (len > kMaxPayload) throw Error(ErrorCode::BadLength, "frame payload too large");
    std::vector<std::uint8_t> buf(5 + len);
    std::memcpy(buf.data(), header, sizeof(header));
    recv_all(fd_, buf.data() + 5, len);
    return wire::frame_from_bytes(buf);
}

TcpListener::TcpListener(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw_errno("socket");
    const int one = 1;
    setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    addr.sin_port = htons(port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw_errno("bind");
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw_errno("getsockname");
    }
    port_ = ntohs(addr.sin_port);
    if (::listen(fd_, 1) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw_errno("listen");
    }
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

TcpConn TcpListener::accept_one() {
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw_errno("accept");
    return TcpConn(fd);
}

} // namespace kap::cli
