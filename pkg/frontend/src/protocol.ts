// Client side of the harmonia.v1 control protocol: JSON text frames over a
// WebSocket, every request carrying a seq the server echoes; telemetry is
// server-initiated with seq 0. The socket is injected so tests can drive
// the client with a mock.

export const PROTOCOL_VERSION = 1;
export const SUBPROTOCOL = "harmonia.v1";

export interface ParamDescriptor {
  id: string;
  min: number;
  max: number;
  default: number | string;
  kind: string;
  count?: number;
  options?: string[];
}

export interface HelloReply {
  type: "hello";
  version: number;
  params: ParamDescriptor[];
  models: string[];
  seq: number;
}

export interface ParamState {
  type: "param_state";
  id: string;
  value: number | string;
  seq: number;
}

export interface TelemetryMessage {
  type: "telemetry";
  seq: 0;
  f0_hz: number;
  rms_db: number;
  peak_db: number;
  utilization: number;
  spectrogram: number[];
}

export interface ErrorMessage {
  type: "error";
  reason: string;
  seq: number;
}

export interface ModelList {
  type: "model_list";
  models: string[];
  seq: number;
}

export type ServerMessage =
  | HelloReply
  | ParamState
  | TelemetryMessage
  | ErrorMessage
  | ModelList;

// The subset of the browser WebSocket the client needs; mocks implement it.
// Handler params are typed loose so the DOM WebSocket assigns cleanly.
// eslint-disable-next-line @typescript-eslint/no-explicit-any
type Handler = ((ev: any) => void) | null;

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: Handler;
  onmessage: Handler;
  onclose: Handler;
}

export interface ClientEvents {
  onHello?(hello: HelloReply): void;
  onParamState?(state: ParamState): void;
  onTelemetry?(telemetry: TelemetryMessage): void;
  onError?(reason: string): void;
  onClose?(): void;
}

export class ControlClient {
  private seq = 1;

  constructor(private socket: SocketLike, private events: ClientEvents) {
    socket.onopen = () => this.sendRaw({ type: "hello", version: PROTOCOL_VERSION });
    socket.onmessage = (ev) => this.dispatch(String(ev.data));
    socket.onclose = () => this.events.onClose?.();
  }

  private sendRaw(message: Record<string, unknown>): void {
    this.socket.send(JSON.stringify({ ...message, seq: this.seq++ }));
  }

  private dispatch(raw: string): void {
    let message: ServerMessage;
    try {
      message = JSON.parse(raw) as ServerMessage;
    } catch {
      this.events.onError?.("unparseable server message");
      return;
    }
    switch (message.type) {
      case "hello":
        this.events.onHello?.(message);
        break;
      case "param_state":
        this.events.onParamState?.(message);
        break;
      case "telemetry":
        this.events.onTelemetry?.(message);
        break;
      case "error":
        this.events.onError?.(message.reason);
        break;
      default:
        break;
    }
  }

  setParam(id: string, value: number | string): void {
    this.sendRaw({ type: "param_set", id, value });
  }

  getParam(id: string): void {
    this.sendRaw({ type: "param_get", id });
  }

  selectModel(name: string): void {
    this.sendRaw({ type: "model_select", name });
  }

  note(kind: "on" | "off", note: number, velocity = 100): void {
    this.sendRaw({ type: "note", kind, note, velocity });
  }

  close(): void {
    this.socket.close();
  }
}
