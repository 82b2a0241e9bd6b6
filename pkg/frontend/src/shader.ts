/** The raycast fragment program, twice: once as GLSL for the GPU and once
 * as TypeScript for tests and software fallback.
 *
 * Both walk the same orthographic rays the server-side renderer uses: the
 * cube spans one world unit per axis, rays cover its bounding sphere
 * (radius R) with `steps` midpoint samples, trilinear filtering fetches
 * through the shared slicemap addressing. Surface mode stops at the first
 * sample over the threshold, refines by bisection and shades with a
 * headlight Lambert term; additive mode averages samples under a gain.
 * At zero elevation the geometry reduces exactly to the server renderer,
 * which is what the silhouette-agreement test relies on.
 *
 * Keep the two implementations in lockstep line for line. The only
 * deliberate divergence from the server is the half-bin threshold guard
 * (`thr - 0.5`): an R8 texel travels through float32 as v/255, and the
 * guard keeps `v >= thr` decisions stable against that rounding. It can
 * only flip samples whose interpolated value lies within half a grey
 * level of the threshold, i.e. isosurface-edge pixels.
 */
import type { AtlasVolume } from "./volumeAtlas";

export type RenderMode = "surface" | "additive";

export interface RenderParams {
  azimuthDeg: number;
  elevationDeg: number;
  imageDim: number;
  steps: number;
  mode: RenderMode;
  threshold: number;
  gain: number;
}

export const DEFAULT_PARAMS: RenderParams = {
  azimuthDeg: 0,
  elevationDeg: 0,
  imageDim: 512,
  steps: 512,
  mode: "surface",
  threshold: 1,
  gain: 4.0,
};

export interface ViewBasis {
  d: [number, number, number];
  right: [number, number, number];
  up: [number, number, number];
}

/** Orbit basis: azimuth spins around z, elevation tilts the camera over
 * the top. At elevation 0: d=(-cos az, -sin az, 0), right=(-sin az, cos az, 0),
 * up=z, matching the server's camera.
 */
export function viewBasis(azimuthDeg: number, elevationDeg: number): ViewBasis {
  const th = (azimuthDeg * Math.PI) / 180;
  const el = (elevationDeg * Math.PI) / 180;
  const dx = -Math.cos(th);
  const dy = -Math.sin(th);
  const cE = Math.cos(el);
  const sE = Math.sin(el);
  return {
    d: [dx * cE, dy * cE, -sE],
    right: [-Math.sin(th), Math.cos(th), 0],
    up: [dx * sE, dy * sE, cE],
  };
}

export const VERTEX_SHADER = `#version 300 es
void main() {
  // fullscreen triangle from the vertex id alone
  vec2 corner = vec2((gl_VertexID << 1) & 2, gl_VertexID & 2);
  gl_Position = vec4(corner * 2.0 - 1.0, 0.0, 1.0);
}
`;

export const FRAGMENT_SHADER = `#version 300 es
precision highp float;
precision highp int;
precision highp sampler2DArray;

uniform sampler2DArray uAtlas;  // R8, one layer per map
uniform int uS;                 // cube edge
uniform int uGrid;              // atlas cells per row
uniform float uR;               // bounding sphere radius
uniform float uDim;             // output image edge
uniform float uSteps;
uniform int uStepsI;
uniform vec3 uD;                // ray direction
uniform vec3 uRight;            // image right axis
uniform vec3 uUp;               // image up axis
uniform int uMode;              // 0 surface, 1 additive
uniform float uThr;             // threshold, [0, 255]
uniform float uGain;

out vec4 oColor;

float fetchVoxel(int x, int y, int z) {
  int perMap = uGrid * uGrid;
  int m = z / perMap;
  int w = z - m * perMap;
  int cy = w / uGrid;
  int cx = w - cy * uGrid;
  return texelFetch(uAtlas, ivec3(cx * uS + x, cy * uS + y, m), 0).r * 255.0;
}

float sampleTrilinear(float ux, float uy, float uz) {
  float xf = floor(ux);
  float yf = floor(uy);
  float zf = floor(uz);
  float fx = ux - xf;
  float fy = uy - yf;
  float fz = uz - zf;
  int n1 = uS - 1;
  int x0 = clamp(int(xf), 0, n1);
  int x1 = clamp(int(xf) + 1, 0, n1);
  int y0 = clamp(int(yf), 0, n1);
  int y1 = clamp(int(yf) + 1, 0, n1);
  int z0 = clamp(int(zf), 0, n1);
  int z1 = clamp(int(zf) + 1, 0, n1);
  float c00 = fetchVoxel(x0, y0, z0) * (1.0 - fx) + fetchVoxel(x1, y0, z0) * fx;
  float c10 = fetchVoxel(x0, y1, z0) * (1.0 - fx) + fetchVoxel(x1, y1, z0) * fx;
  float c01 = fetchVoxel(x0, y0, z1) * (1.0 - fx) + fetchVoxel(x1, y0, z1) * fx;
  float c11 = fetchVoxel(x0, y1, z1) * (1.0 - fx) + fetchVoxel(x1, y1, z1) * fx;
  float c0 = c00 * (1.0 - fy) + c10 * fy;
  float c1 = c01 * (1.0 - fy) + c11 * fy;
  return c0 * (1.0 - fz) + c1 * fz;
}

float sampleWorld(vec3 p) {
  float n1h = (float(uS) - 1.0) * 0.5;
  vec3 u = p * float(uS) + n1h;
  float hi = float(uS) - 0.5;
  if (u.x < -0.5 || u.x > hi || u.y < -0.5 || u.y > hi || u.z < -0.5 || u.z > hi) {
    return -1.0;
  }
  return sampleTrilinear(u.x, u.y, u.z);
}

void main() {
  float pxSize = 2.0 * uR / uDim;
  float dt = 2.0 * uR / uSteps;
  // window y runs bottom-up, so the canvas top row sees wy = +R like the
  // server image's row 0
  float wx = -uR + gl_FragCoord.x * pxSize;
  float wy = -uR + gl_FragCoord.y * pxSize;
  vec3 o = uRight * wx + uUp * wy;

  float shade = 0.0;
  if (uMode == 1) {
    float acc = 0.0;
    for (int k = 0; k < uStepsI; k++) {
      float t = -uR + (float(k) + 0.5) * dt;
      float v = sampleWorld(o + uD * t);
      if (v > 0.0) acc += v;
    }
    float val = uGain * acc / uSteps;
    shade = min(val, 255.0) / 255.0;
  } else {
    float thr = uThr - 0.5;
    for (int k = 0; k < uStepsI; k++) {
      float t = -uR + (float(k) + 0.5) * dt;
      float v = sampleWorld(o + uD * t);
      if (v >= thr) {
        float tLo = t - dt;
        float tHi = t;
        for (int b = 0; b < 4; b++) {
          float tm = 0.5 * (tLo + tHi);
          if (sampleWorld(o + uD * tm) >= thr) { tHi = tm; } else { tLo = tm; }
        }
        vec3 h = o + uD * tHi;
        float n1h = (float(uS) - 1.0) * 0.5;
        vec3 uu = h * float(uS) + n1h;
        float gx = sampleTrilinear(uu.x + 1.0, uu.y, uu.z) - sampleTrilinear(uu.x - 1.0, uu.y, uu.z);
        float gy = sampleTrilinear(uu.x, uu.y + 1.0, uu.z) - sampleTrilinear(uu.x, uu.y - 1.0, uu.z);
        float gz = sampleTrilinear(uu.x, uu.y, uu.z + 1.0) - sampleTrilinear(uu.x, uu.y, uu.z - 1.0);
        float gn = sqrt(gx * gx + gy * gy + gz * gz);
        if (gn < 1e-12) {
          shade = 1.0;
        } else {
          shade = max((gx * uD.x + gy * uD.y + gz * uD.z) / gn, 0.0);
        }
        break;
      }
    }
  }
  oColor = vec4(vec3(shade), 1.0);
}
`;

/** TypeScript twin of the fragment program. Renders the whole frame on the
 * CPU; returns imageDim*imageDim bytes, row 0 at the top (server layout).
 */
export function renderFrameCPU(vol: AtlasVolume, params: RenderParams): Uint8Array {
  const s = vol.scheme.s;
  const n1 = s - 1;

  const fetchVoxel = (x: number, y: number, z: number): number => vol.fetch(x, y, z);

  const sampleTrilinear = (ux: number, uy: number, uz: number): number => {
    const xf = Math.floor(ux);
    const yf = Math.floor(uy);
    const zf = Math.floor(uz);
    const fx = ux - xf;
    const fy = uy - yf;
    const fz = uz - zf;
    const x0 = Math.min(Math.max(xf, 0), n1);
    const x1 = Math.min(Math.max(xf + 1, 0), n1);
    const y0 = Math.min(Math.max(yf, 0), n1);
    const y1 = Math.min(Math.max(yf + 1, 0), n1);
    const z0 = Math.min(Math.max(zf, 0), n1);
    const z1 = Math.min(Math.max(zf + 1, 0), n1);
    const c00 = fetchVoxel(x0, y0, z0) * (1.0 - fx) + fetchVoxel(x1, y0, z0) * fx;
    const c10 = fetchVoxel(x0, y1, z0) * (1.0 - fx) + fetchVoxel(x1, y1, z0) * fx;
    const c01 = fetchVoxel(x0, y0, z1) * (1.0 - fx) + fetchVoxel(x1, y0, z1) * fx;
    const c11 = fetchVoxel(x0, y1, z1) * (1.0 - fx) + fetchVoxel(x1, y1, z1) * fx;
    const c0 = c00 * (1.0 - fy) + c10 * fy;
    const c1 = c01 * (1.0 - fy) + c11 * fy;
    return c0 * (1.0 - fz) + c1 * fz;
  };

  const n1h = (s - 1) * 0.5;
  const hi = s - 0.5;
  const sampleWorld = (px: number, py: number, pz: number): number => {
    const ux = px * s + n1h;
    const uy = py * s + n1h;
    const uz = pz * s + n1h;
    if (ux < -0.5 || ux > hi || uy < -0.5 || uy > hi || uz < -0.5 || uz > hi) {
      return -1.0;
    }
    return sampleTrilinear(ux, uy, uz);
  };

  const { d, right, up } = viewBasis(params.azimuthDeg, params.elevationDeg);
  const bigR = Math.sqrt(0.75); // bounding sphere of the unit cube
  const dim = params.imageDim;
  const steps = params.steps;
  const pxSize = (2.0 * bigR) / dim;
  const dt = (2.0 * bigR) / steps;
  const out = new Uint8Array(dim * dim);

  for (let j = 0; j < dim; j++) {
    const wy = bigR - (j + 0.5) * pxSize;
    for (let i = 0; i < dim; i++) {
      const wx = -bigR + (i + 0.5) * pxSize;
      const ox = right[0] * wx + up[0] * wy;
      const oy = right[1] * wx + up[1] * wy;
      const oz = right[2] * wx + up[2] * wy;

      let byte = 0;
      if (params.mode === "additive") {
        let acc = 0.0;
        for (let k = 0; k < steps; k++) {
          const t = -bigR + (k + 0.5) * dt;
          const v = sampleWorld(ox + d[0] * t, oy + d[1] * t, oz + d[2] * t);
          if (v > 0.0) acc += v;
        }
        let val = (params.gain * acc) / steps;
        if (val > 255.0) val = 255.0;
        byte = Math.floor(val + 0.5);
      } else {
        const thr = params.threshold - 0.5;
        for (let k = 0; k < steps; k++) {
          const t = -bigR + (k + 0.5) * dt;
          const v = sampleWorld(ox + d[0] * t, oy + d[1] * t, oz + d[2] * t);
          if (v >= thr) {
            let tLo = t - dt;
            let tHi = t;
            for (let b = 0; b < 4; b++) {
              const tm = 0.5 * (tLo + tHi);
              const vm = sampleWorld(ox + d[0] * tm, oy + d[1] * tm, oz + d[2] * tm);
              if (vm >= thr) tHi = tm;
              else tLo = tm;
            }
            const hx = ox + d[0] * tHi;
            const hy = oy + d[1] * tHi;
            const hz = oz + d[2] * tHi;
            const ux = hx * s + n1h;
            const uy = hy * s + n1h;
            const uz = hz * s + n1h;
            const gx = sampleTrilinear(ux + 1.0, uy, uz) - sampleTrilinear(ux - 1.0, uy, uz);
            const gy = sampleTrilinear(ux, uy + 1.0, uz) - sampleTrilinear(ux, uy - 1.0, uz);
            const gz = sampleTrilinear(ux, uy, uz + 1.0) - sampleTrilinear(ux, uy, uz - 1.0);
            const gn = Math.sqrt(gx * gx + gy * gy + gz * gz);
            let shade: number;
            if (gn < 1e-12) {
              shade = 1.0;
            } else {
              shade = (gx * d[0] + gy * d[1] + gz * d[2]) / gn;
              if (shade < 0.0) shade = 0.0;
            }
            byte = Math.floor(255.0 * shade + 0.5);
            break;
          }
        }
      }
      out[j * dim + i] = byte;
    }
  }
  return out;
}
