"""Process bridge to an external model worker.

Wire format: each frame is a 4-byte big-endian unsigned length prefix
followed by that many bytes of UTF-8 JSON encoding a single object with a
string "type" field. The worker speaks first with

    {"type": "hello", "protocol_version": 1, "latent_dim": L, "embedding_dim": E}

after which the engine side drives a strict one-outstanding-request
conversation: "set_target" answered by "target_ok" (or "error"), "eval"
answered by "embeddings" carrying the matching request id (or "error"), and
a final one-way "shutdown". Embeddings come back raw; distances stay an
engine-side concern. Frames are encoded canonically (sorted keys, compact
separators, shortest round-trip floats), so equal messages yield equal bytes.
"""

from __future__ import annotations

import json
import shlex
import struct
import subprocess
import tempfile
from typing import BinaryIO, Sequence

from .core import Embedding, LatentVector
from .evaluators import BatchEvaluator, euclidean_distance

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 256 * 1024 * 1024
_LENGTH = struct.Struct(">I")


class BridgeError(RuntimeError):
    """Base class for everything that can go wrong while talking to a worker."""


class ProtocolError(BridgeError):
    """The byte stream was intact but the conversation broke the protocol."""


class TransportError(BridgeError):
    """The byte stream itself failed (truncation, closed pipe, dead worker)."""


class WorkerError(BridgeError):
    """The worker answered with an error frame; carries its message verbatim."""


class EvaluationTargetUnset(BridgeError):
    """Evaluation was attempted before any target embedding was set."""


def encode_frame(message: dict) -> bytes:
    """Serialize one protocol message to its canonical framed bytes."""
    if not isinstance(message, dict) or not isinstance(message.get("type"), str):
        raise ProtocolError("frame payload must be an object with a string 'type' field")
    payload = json.dumps(
        message, separators=(",", ":"), sort_keys=True, allow_nan=False
    ).encode("utf-8")
    if len(payload) > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame payload of {len(payload)} bytes exceeds the frame limit")
    return _LENGTH.pack(len(payload)) + payload


def decode_payload(payload: bytes) -> dict:
    """Parse and validate the JSON payload of one frame."""
    try:
        message = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(f"frame payload is not valid JSON: {exc}") from exc
    if not isinstance(message, dict) or not isinstance(message.get("type"), str):
        raise ProtocolError("frame payload must be an object with a string 'type' field")
    return message


def _read_exact(stream: BinaryIO, size: int, what: str) -> bytes:
    chunks = []
    remaining = size
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            got = size - remaining
            raise TransportError(f"stream closed after {got} of {size} bytes while reading {what}")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(stream: BinaryIO) -> dict:
    """Read one complete frame from a binary stream."""
    header = _read_exact(stream, _LENGTH.size, "a frame length prefix")
    (length,) = _LENGTH.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"declared frame length {length} exceeds the frame limit")
    return decode_payload(_read_exact(stream, length, "a frame payload"))


def write_frame(stream: BinaryIO, message: dict) -> None:
    """Write one frame and flush."""
    try:
        stream.write(encode_frame(message))
        stream.flush()
    except (BrokenPipeError, ValueError, OSError) as exc:
        raise TransportError(f"cannot write to worker: {exc}") from exc


class WorkerHandle:
    """Engine-side endpoint of one worker conversation.

    Owns the request-id counter and, when spawned, the child process. Can be
    constructed directly over in-memory streams for testing.
    """

    def __init__(
        self,
        reader: BinaryIO,
        writer: BinaryIO,
        process: subprocess.Popen | None = None,
        stderr_file=None,
    ):
        self._reader = reader
        self._writer = writer
        self._process = process
        self._stderr_file = stderr_file
        self._next_id = 1
        self._closed = False
        self._exit_status: int | None = None
        self.latent_dim: int | None = None
        self.embedding_dim: int | None = None
        self.target: Embedding | None = None

    @classmethod
    def spawn(cls, command: str | Sequence[str]) -> WorkerHandle:
        """Start a worker child process with piped stdin/stdout.

        stderr is captured to a spool file and quoted in transport errors.
        """
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not argv:
            raise ValueError("worker command is empty")
        stderr_file = tempfile.TemporaryFile()
        try:
            process = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=stderr_file,
            )
        except OSError as exc:
            stderr_file.close()
            raise TransportError(f"cannot start worker {argv[0]!r}: {exc}") from exc
        return cls(process.stdout, process.stdin, process=process, stderr_file=stderr_file)

    def _stderr_tail(self, limit: int = 2000) -> str:
        if self._stderr_file is None:
            return ""
        try:
            self._stderr_file.seek(0, 2)
            size = self._stderr_file.tell()
            self._stderr_file.seek(max(0, size - limit))
            return self._stderr_file.read().decode("utf-8", errors="replace")
        except (OSError, ValueError):
            return ""

    def _receive(self) -> dict:
        try:
            message = read_frame(self._reader)
        except TransportError as exc:
            tail = self._stderr_tail()
            if tail:
                raise TransportError(f"{exc}; worker stderr: {tail.strip()}") from exc
            raise
        if message["type"] == "error":
            raise WorkerError(str(message.get("message", "worker reported an error")))
        return message

    def handshake(self, expected_latent_dim: int, expected_embedding_dim: int) -> tuple[int, int]:
        """Consume the worker's hello and pin the negotiated dimensions."""
        message = self._receive()
        if message["type"] != "hello":
            raise ProtocolError(f"expected a hello frame, got type {message['type']!r}")
        version = message.get("protocol_version")
        if version != PROTOCOL_VERSION:
            raise ProtocolError(
                f"worker speaks protocol version {version!r}, need {PROTOCOL_VERSION}"
            )
        latent_dim = message.get("latent_dim")
        embedding_dim = message.get("embedding_dim")
        if latent_dim != expected_latent_dim or embedding_dim != expected_embedding_dim:
            raise ProtocolError(
                f"worker dimensions ({latent_dim}, {embedding_dim}) do not match "
                f"the configured ({expected_latent_dim}, {expected_embedding_dim})"
            )
        self.latent_dim = int(latent_dim)
        self.embedding_dim = int(embedding_dim)
        return self.latent_dim, self.embedding_dim

    def set_target(self, image_path: str) -> Embedding:
        """Point the worker at a reference image; returns its embedding."""
        if self.latent_dim is None:
            raise ProtocolError("handshake must complete before set_target")
        write_frame(self._writer, {"type": "set_target", "image_path": str(image_path)})
        message = self._receive()
        if message["type"] != "target_ok":
            raise ProtocolError(f"expected target_ok, got type {message['type']!r}")
        embedding = message.get("embedding")
        if not isinstance(embedding, list) or len(embedding) != self.embedding_dim:
            raise ProtocolError("target_ok frame carries a malformed embedding")
        self.target = Embedding(embedding, dim=self.embedding_dim)
        return self.target

    def eval_remote(self, batch: Sequence[LatentVector]) -> list[Embedding]:
        """Embed one batch of latents remotely; order matches the request."""
        if self.latent_dim is None:
            raise ProtocolError("handshake must complete before eval")
        if len(batch) == 0:
            raise ValueError("batch must be non-empty")
        request_id = self._next_id
        self._next_id += 1
        latents = []
        for i, z in enumerate(batch):
            if len(z) != self.latent_dim:
                raise ValueError(f"latent at index {i} has length {len(z)}, expected {self.latent_dim}")
            latents.append(z.to_list())
        write_frame(self._writer, {"type": "eval", "id": request_id, "latents": latents})
        message = self._receive()
        if message["type"] != "embeddings":
            raise ProtocolError(f"expected embeddings, got type {message['type']!r}")
        if message.get("id") != request_id:
            raise ProtocolError(
                f"response id {message.get('id')!r} does not match request id {request_id}"
            )
        values = message.get("embeddings")
        if not isinstance(values, list) or len(values) != len(batch):
            raise ProtocolError(
                f"expected {len(batch)} embeddings, got "
                f"{len(values) if isinstance(values, list) else type(values).__name__}"
            )
        out = []
        for i, vec in enumerate(values):
            if not isinstance(vec, list) or len(vec) != self.embedding_dim:
                raise ProtocolError(f"embedding at index {i} is malformed")
            out.append(Embedding(vec, dim=self.embedding_dim))
        return out

    def shutdown(self, grace_period: float = 5.0) -> int | None:
        """Ask the worker to exit; escalate to termination after the grace period.

        Idempotent: repeated calls return the first recorded exit status.
        """
        if self._closed:
            return self._exit_status
        self._closed = True
        try:
            write_frame(self._writer, {"type": "shutdown"})
        except TransportError:
            pass
        try:
            self._writer.close()
        except (OSError, ValueError):
            pass
        if self._process is not None:
            try:
                self._exit_status = self._process.wait(timeout=grace_period)
            except subprocess.TimeoutExpired:
                self._process.terminate()
                try:
                    self._exit_status = self._process.wait(timeout=grace_period)
                except subprocess.TimeoutExpired:
                    self._process.kill()
                    self._exit_status = self._process.wait()
            try:
                self._reader.close()
            except (OSError, ValueError):
                pass
        if self._stderr_file is not None:
            try:
                self._stderr_file.close()
            except OSError:
                pass
        return self._exit_status


class BridgeEvaluator(BatchEvaluator):
    """BatchEvaluator backed by a worker process via a WorkerHandle.

    The worker only produces embeddings; this wrapper computes distances to
    the target recorded during set_target.
    """

    def __init__(self, handle: WorkerHandle, command: str | Sequence[str] | None = None):
        if handle.latent_dim is None or handle.embedding_dim is None:
            raise ProtocolError("worker handle must complete its handshake first")
        self._handle = handle
        self._command = command
        self.latent_dim = handle.latent_dim
        self.embedding_dim = handle.embedding_dim

    @property
    def target_embedding(self) -> Embedding:
        if self._handle.target is None:
            raise EvaluationTargetUnset("no target set; call set_target before evaluating")
        return self._handle.target

    def set_target(self, image_path: str) -> Embedding:
        return self._handle.set_target(image_path)

    def evaluate_batch(self, batch: Sequence[LatentVector]) -> list[tuple[Embedding, float]]:
        self._check_batch(batch)
        target = self.target_embedding
        embeddings = self._handle.eval_remote(batch)
        return [(emb, euclidean_distance(emb, target)) for emb in embeddings]

    def describe(self) -> dict:
        descriptor = {
            "kind": "worker",
            "latent_dim": self.latent_dim,
            "embedding_dim": self.embedding_dim,
        }
        if self._command is not None:
            cmd = self._command
            descriptor["command"] = cmd if isinstance(cmd, str) else " ".join(cmd)
        return descriptor
