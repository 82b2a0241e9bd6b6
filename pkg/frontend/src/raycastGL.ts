/** WebGL2 backend for the raycast program in shader.ts.
 *
 * Atlases upload once per scheme as an R8 2D texture array (one layer per
 * map); every frame is a fullscreen triangle whose fragments march rays.
 * The decoded atlases are retained so a lost context can be rebuilt
 * without going back to the network.
 */
import {
  FRAGMENT_SHADER,
  VERTEX_SHADER,
  viewBasis,
  type RenderParams,
} from "./shader";
import type { AtlasVolume } from "./volumeAtlas";

function compile(gl: WebGL2RenderingContext, type: number, source: string): WebGLShader {
  const shader = gl.createShader(type);
  if (!shader) throw new Error("createShader failed");
  gl.shaderSource(shader, source);
  gl.compileShader(shader);
  if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
    const log = gl.getShaderInfoLog(shader);
    gl.deleteShader(shader);
    throw new Error(`shader compile failed: ${log}`);
  }
  return shader;
}

export class GLRenderer {
  private gl: WebGL2RenderingContext | null = null;
  private program: WebGLProgram | null = null;
  private texture: WebGLTexture | null = null;
  private volume: AtlasVolume | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onRestored?: () => void,
  ) {
    canvas.addEventListener("webglcontextlost", (e) => e.preventDefault());
    canvas.addEventListener("webglcontextrestored", () => {
      this.gl = null;
      if (this.init() && this.volume) {
        this.upload(this.volume);
        this.onRestored?.();
      }
    });
  }

  /** True when a WebGL2 context and the program are usable. */
  init(): boolean {
    if (this.gl) return true;
    const gl = this.canvas.getContext("webgl2", {
      antialias: false,
      preserveDrawingBuffer: true,
    });
    if (!gl) return false;
    const program = gl.createProgram();
    if (!program) return false;
    gl.attachShader(program, compile(gl, gl.VERTEX_SHADER, VERTEX_SHADER));
    gl.attachShader(program, compile(gl, gl.FRAGMENT_SHADER, FRAGMENT_SHADER));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(`program link failed: ${gl.getProgramInfoLog(program)}`);
    }
    this.gl = gl;
    this.program = program;
    this.texture = null;
    return true;
  }

  /** Upload a scheme's atlases; replaces the previous texture array. */
  upload(volume: AtlasVolume): void {
    const gl = this.gl;
    if (!gl || !this.program) throw new Error("renderer not initialized");
    const sch = volume.scheme;
    if (this.texture) gl.deleteTexture(this.texture);
    const tex = gl.createTexture();
    gl.bindTexture(gl.TEXTURE_2D_ARRAY, tex);
    gl.pixelStorei(gl.UNPACK_ALIGNMENT, 1);
    gl.texStorage3D(gl.TEXTURE_2D_ARRAY, 1, gl.R8, sch.atlas, sch.atlas, sch.maps);
    for (let m = 0; m < sch.maps; m++) {
      gl.texSubImage3D(
        gl.TEXTURE_2D_ARRAY, 0, 0, 0, m, sch.atlas, sch.atlas, 1,
        gl.RED, gl.UNSIGNED_BYTE, volume.atlases[m].gray,
      );
    }
    gl.texParameteri(gl.TEXTURE_2D_ARRAY, gl.TEXTURE_MIN_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D_ARRAY, gl.TEXTURE_MAG_FILTER, gl.NEAREST);
    gl.texParameteri(gl.TEXTURE_2D_ARRAY, gl.TEXTURE_WRAP_S, gl.CLAMP_TO_EDGE);
    gl.texParameteri(gl.TEXTURE_2D_ARRAY, gl.TEXTURE_WRAP_T, gl.CLAMP_TO_EDGE);
    this.texture = tex;
    this.volume = volume;
  }

  render(params: RenderParams): void {
    const gl = this.gl;
    const volume = this.volume;
    if (!gl || !this.program || !volume) return;
    const dim = params.imageDim;
    if (this.canvas.width !== dim) this.canvas.width = dim;
    if (this.canvas.height !== dim) this.canvas.height = dim;

    gl.viewport(0, 0, dim, dim);
    gl.useProgram(this.program);
    gl.activeTexture(gl.TEXTURE0);
    gl.bindTexture(gl.TEXTURE_2D_ARRAY, this.texture);

    const u = (name: string) => gl.getUniformLocation(this.program!, name);
    const basis = viewBasis(params.azimuthDeg, params.elevationDeg);
    gl.uniform1i(u("uAtlas"), 0);
    gl.uniform1i(u("uS"), volume.scheme.s);
    gl.uniform1i(u("uGrid"), volume.scheme.grid);
    gl.uniform1f(u("uR"), Math.sqrt(0.75));
    gl.uniform1f(u("uDim"), dim);
    gl.uniform1f(u("uSteps"), params.steps);
    gl.uniform1i(u("uStepsI"), params.steps);
    gl.uniform3f(u("uD"), basis.d[0], basis.d[1], basis.d[2]);
    gl.uniform3f(u("uRight"), basis.right[0], basis.right[1], basis.right[2]);
    gl.uniform3f(u("uUp"), basis.up[0], basis.up[1], basis.up[2]);
    gl.uniform1i(u("uMode"), params.mode === "additive" ? 1 : 0);
    gl.uniform1f(u("uThr"), params.threshold);
    gl.uniform1f(u("uGain"), params.gain);

    gl.drawArrays(gl.TRIANGLES, 0, 3);
  }

  dispose(): void {
    const gl = this.gl;
    if (gl) {
      if (this.texture) gl.deleteTexture(this.texture);
      if (this.program) gl.deleteProgram(this.program);
    }
    this.gl = null;
    this.program = null;
    this.texture = null;
    this.volume = null;
  }
}
