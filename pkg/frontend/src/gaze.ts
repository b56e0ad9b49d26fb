// Gaze sources: something that can answer "where is the user looking right
// now, and is that reading valid?". The default is the mouse pointer; an
// external source (eye tracker, playback) can be fed programmatically.

export interface GazePoint {
  x: number;
  y: number;
  valid: boolean;
}

export interface GazeSource {
  current(): GazePoint;
}

/** Tracks the pointer over an element; invalid while the pointer is off it. */
export class MouseGazeSource implements GazeSource {
  private point: GazePoint = { x: 0, y: 0, valid: false };

  constructor(target: HTMLElement) {
    target.addEventListener("mousemove", (event: MouseEvent) => {
      const box = target.getBoundingClientRect();
      this.point = {
        x: event.clientX - box.left,
        y: event.clientY - box.top,
        valid: true,
      };
    });
    target.addEventListener("mouseleave", () => {
      this.point = { ...this.point, valid: false };
    });
  }

  current(): GazePoint {
    return this.point;
  }
}

/** Programmatically fed source for trackers or recorded traces. */
export class ExternalGazeSource implements GazeSource {
  private point: GazePoint = { x: 0, y: 0, valid: false };

  feed(x: number, y: number, valid = true): void {
    this.point = { x, y, valid };
  }

  current(): GazePoint {
    return this.point;
  }
}
