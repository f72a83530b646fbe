/** Minimal OOXML presentation parts.
 *
 * Only what a single-slide diagram needs: content types, relationship
 * parts, a blank master/layout/theme chain, and the slide shape tree with
 * rounded rectangles, text boxes, pictures, and site-bound connectors.
 */

import { EMU_PER_INCH } from "./types.js";

export const NS = {
  a: "http://schemas.openxmlformats.org/drawingml/2006/main",
  r: "http://schemas.openxmlformats.org/officeDocument/2006/relationships",
  p: "http://schemas.openxmlformats.org/presentationml/2006/main",
  ct: "http://schemas.openxmlformats.org/package/2006/content-types",
  rel: "http://schemas.openxmlformats.org/package/2006/relationships",
};

const REL_TYPES = {
  officeDocument:
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument",
  slideMaster:
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideMaster",
  slideLayout:
    "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slideLayout",
  slide: "http://schemas.openxmlformats.org/officeDocument/2006/relationships/slide",
  theme: "http://schemas.openxmlformats.org/officeDocument/2006/relationships/theme",
  image: "http://schemas.openxmlformats.org/officeDocument/2006/relationships/image",
};

const XML_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n';

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

export function emu(inches: number): number {
  return Math.round(inches * EMU_PER_INCH);
}

export interface Paragraph {
  text: string;
  bold?: boolean;
  sizeHundredths?: number; // e.g. 1100 = 11pt
}

export const FILL_BY_KIND: Record<string, string> = {
  module: "EEF2F8",
  tool: "F9F4E8",
  "component-text": "FFFFFF",
  "component-icon": "FFFFFF",
  "component-image": "FFFFFF",
};

export const STROKE_COLOR = "51607A";
export const TEXT_COLOR = "1F2A40";

export function contentTypesXml(imageExtensions: string[]): string {
  const defaults = imageExtensions
    .map((ext) => {
      const type = ext === "jpg" ? "jpeg" : ext;
      return `  <Default Extension="${ext}" ContentType="image/${type}"/>`;
    })
    .join("\n");
  return (
    XML_DECL +
    `<Types xmlns="${NS.ct}">
  <Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>
  <Default Extension="xml" ContentType="application/xml"/>
${defaults ? defaults + "\n" : ""}  <Override PartName="/ppt/presentation.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.presentation.main+xml"/>
  <Override PartName="/ppt/slideMasters/slideMaster1.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slideMaster+xml"/>
  <Override PartName="/ppt/slideLayouts/slideLayout1.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slideLayout+xml"/>
  <Override PartName="/ppt/slides/slide1.xml" ContentType="application/vnd.openxmlformats-officedocument.presentationml.slide+xml"/>
  <Override PartName="/ppt/theme/theme1.xml" ContentType="application/vnd.openxmlformats-officedocument.theme+xml"/>
  <Override PartName="/docProps/core.xml" ContentType="application/vnd.openxmlformats-package.core-properties+xml"/>
  <Override PartName="/docProps/app.xml" ContentType="application/vnd.openxmlformats-officedocument.extended-properties+xml"/>
</Types>
`
  );
}

export function rootRelsXml(): string {
  return (
    XML_DECL +
    `<Relationships xmlns="${NS.rel}">
  <Relationship Id="rId1" Type="${REL_TYPES.officeDocument}" Target="ppt/presentation.xml"/>
  <Relationship Id="rId2" Type="http://schemas.openxmlformats.org/package/2006/relationships/metadata/core-properties" Target="docProps/core.xml"/>
  <Relationship Id="rId3" Type="http://schemas.openxmlformats.org/officeDocument/2006/relationships/extended-properties" Target="docProps/app.xml"/>
</Relationships>
`
  );
}

export function corePropsXml(): string {
  // Fixed timestamps keep re-exports byte-identical.
  return (
    XML_DECL +
    `<cp:coreProperties xmlns:cp="http://schemas.openxmlformats.org/package/2006/metadata/core-properties" xmlns:dc="http://purl.org/dc/elements/1.1/" xmlns:dcterms="http://purl.org/dc/terms/" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance">
  <dc:title>Architecture diagram</dc:title>
  <dc:creator>layout-slide-exporter</dc:creator>
  <dcterms:created xsi:type="dcterms:W3CDTF">2020-01-01T00:00:00Z</dcterms:created>
  <dcterms:modified xsi:type="dcterms:W3CDTF">2020-01-01T00:00:00Z</dcterms:modified>
</cp:coreProperties>
`
  );
}

export function appPropsXml(): string {
  return (
    XML_DECL +
    `<Properties xmlns="http://schemas.openxmlformats.org/officeDocument/2006/extended-properties" xmlns:vt="http://schemas.openxmlformats.org/officeDocument/2006/docPropsVTypes">
  <Application>layout-slide-exporter</Application>
  <Slides>1</Slides>
</Properties>
`
  );
}

export function presentationXml(slideWIn: number, slideHIn: number): string {
  const cx = emu(slideWIn);
  const cy = emu(slideHIn);
  return (
    XML_DECL +
    `<p:presentation xmlns:a="${NS.a}" xmlns:r="${NS.r}" xmlns:p="${NS.p}">
  <p:sldMasterIdLst><p:sldMasterId id="2147483648" r:id="rId1"/></p:sldMasterIdLst>
  <p:sldIdLst><p:sldId id="256" r:id="rId2"/></p:sldIdLst>
  <p:sldSz cx="${cx}" cy="${cy}"/>
  <p:notesSz cx="6858000" cy="9144000"/>
</p:presentation>
`
  );
}

export function presentationRelsXml(): string {
  return (
    XML_DECL +
    `<Relationships xmlns="${NS.rel}">
  <Relationship Id="rId1" Type="${REL_TYPES.slideMaster}" Target="slideMasters/slideMaster1.xml"/>
  <Relationship Id="rId2" Type="${REL_TYPES.slide}" Target="slides/slide1.xml"/>
  <Relationship Id="rId3" Type="${REL_TYPES.theme}" Target="theme/theme1.xml"/>
</Relationships>
`
  );
}

const EMPTY_SP_TREE = `<p:spTree>
      <p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>
      <p:grpSpPr><a:xfrm><a:off x="0" y="0"/><a:ext cx="0" cy="0"/><a:chOff x="0" y="0"/><a:chExt cx="0" cy="0"/></a:xfrm></p:grpSpPr>
    </p:spTree>`;

export function slideMasterXml(): string {
  return (
    XML_DECL +
    `<p:sldMaster xmlns:a="${NS.a}" xmlns:r="${NS.r}" xmlns:p="${NS.p}">
  <p:cSld>
    <p:bg><p:bgPr><a:solidFill><a:srgbClr val="FFFFFF"/></a:solidFill><a:effectLst/></p:bgPr></p:bg>
    ${EMPTY_SP_TREE}
  </p:cSld>
  <p:clrMap bg1="lt1" tx1="dk1" bg2="lt2" tx2="dk2" accent1="accent1" accent2="accent2" accent3="accent3" accent4="accent4" accent5="accent5" accent6="accent6" hlink="hlink" folHlink="folHlink"/>
  <p:sldLayoutIdLst><p:sldLayoutId id="2147483649" r:id="rId1"/></p:sldLayoutIdLst>
</p:sldMaster>
`
  );
}

export function slideMasterRelsXml(): string {
  return (
    XML_DECL +
    `<Relationships xmlns="${NS.rel}">
  <Relationship Id="rId1" Type="${REL_TYPES.slideLayout}" Target="../slideLayouts/slideLayout1.xml"/>
  <Relationship Id="rId2" Type="${REL_TYPES.theme}" Target="../theme/theme1.xml"/>
</Relationships>
`
  );
}

export function slideLayoutXml(): string {
  return (
    XML_DECL +
    `<p:sldLayout xmlns:a="${NS.a}" xmlns:r="${NS.r}" xmlns:p="${NS.p}" type="blank">
  <p:cSld name="Blank">
    ${EMPTY_SP_TREE}
  </p:cSld>
  <p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr>
</p:sldLayout>
`
  );
}

export function slideLayoutRelsXml(): string {
  return (
    XML_DECL +
    `<Relationships xmlns="${NS.rel}">
  <Relationship Id="rId1" Type="${REL_TYPES.slideMaster}" Target="../slideMasters/slideMaster1.xml"/>
</Relationships>
`
  );
}

export function themeXml(): string {
  const fill = (shade: string) =>
    `<a:solidFill><a:schemeClr val="phClr"${shade}/></a:solidFill>`;
  const line = (w: number) =>
    `<a:ln w="${w}" cap="flat" cmpd="sng" algn="ctr"><a:solidFill><a:schemeClr val="phClr"/></a:solidFill><a:prstDash val="solid"/></a:ln>`;
  const effect = `<a:effectStyle><a:effectLst/></a:effectStyle>`;
  return (
    XML_DECL +
    `<a:theme xmlns:a="${NS.a}" name="Diagram">
  <a:themeElements>
    <a:clrScheme name="Diagram">
      <a:dk1><a:srgbClr val="1F2A40"/></a:dk1>
      <a:lt1><a:srgbClr val="FFFFFF"/></a:lt1>
      <a:dk2><a:srgbClr val="51607A"/></a:dk2>
      <a:lt2><a:srgbClr val="EEF2F8"/></a:lt2>
      <a:accent1><a:srgbClr val="4472C4"/></a:accent1>
      <a:accent2><a:srgbClr val="ED7D31"/></a:accent2>
      <a:accent3><a:srgbClr val="A5A5A5"/></a:accent3>
      <a:accent4><a:srgbClr val="FFC000"/></a:accent4>
      <a:accent5><a:srgbClr val="5B9BD5"/></a:accent5>
      <a:accent6><a:srgbClr val="70AD47"/></a:accent6>
      <a:hlink><a:srgbClr val="0563C1"/></a:hlink>
      <a:folHlink><a:srgbClr val="954F72"/></a:folHlink>
    </a:clrScheme>
    <a:fontScheme name="Diagram">
      <a:majorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:majorFont>
      <a:minorFont><a:latin typeface="Calibri"/><a:ea typeface=""/><a:cs typeface=""/></a:minorFont>
    </a:fontScheme>
    <a:fmtScheme name="Diagram">
      <a:fillStyleLst>${fill("")}${fill("")}${fill("")}</a:fillStyleLst>
      <a:lnStyleLst>${line(6350)}${line(12700)}${line(19050)}</a:lnStyleLst>
      <a:effectStyleLst>${effect}${effect}${effect}</a:effectStyleLst>
      <a:bgFillStyleLst>${fill("")}${fill("")}${fill("")}</a:bgFillStyleLst>
    </a:fmtScheme>
  </a:themeElements>
</a:theme>
`
  );
}

// ---------------------------------------------------------------------------
// Slide shape builders
// ---------------------------------------------------------------------------

export interface EmuRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

function xfrm(rect: EmuRect, flipH = false, flipV = false): string {
  const flips = `${flipH ? ' flipH="1"' : ""}${flipV ? ' flipV="1"' : ""}`;
  return `<a:xfrm${flips}><a:off x="${rect.x}" y="${rect.y}"/><a:ext cx="${rect.w}" cy="${rect.h}"/></a:xfrm>`;
}

function txBody(paragraphs: Paragraph[], anchor: string): string {
  const body = paragraphs
    .map((p) => {
      const props = `sz="${p.sizeHundredths ?? 1100}"${p.bold ? ' b="1"' : ""}`;
      return (
        `<a:p><a:r><a:rPr lang="en-US" ${props} dirty="0">` +
        `<a:solidFill><a:srgbClr val="${TEXT_COLOR}"/></a:solidFill></a:rPr>` +
        `<a:t>${escapeXml(p.text)}</a:t></a:r></a:p>`
      );
    })
    .join("");
  return (
    `<p:txBody><a:bodyPr wrap="square" anchor="${anchor}" lIns="45720" tIns="27432" rIns="45720" bIns="27432"><a:normAutofit/></a:bodyPr>` +
    `<a:lstStyle/>${body || "<a:p/>"}</p:txBody>`
  );
}

export function shapeXml(options: {
  id: number;
  name: string;
  preset: "roundRect" | "rect" | "ellipse";
  rect: EmuRect;
  fill: string;
  paragraphs: Paragraph[];
  textBox?: boolean;
  anchor?: "t" | "ctr";
}): string {
  const { id, name, preset, rect, fill, paragraphs } = options;
  return `<p:sp>
  <p:nvSpPr><p:cNvPr id="${id}" name="${escapeXml(name)}"/><p:cNvSpPr${options.textBox ? ' txBox="1"' : ""}/><p:nvPr/></p:nvSpPr>
  <p:spPr>${xfrm(rect)}<a:prstGeom prst="${preset}"><a:avLst/></a:prstGeom><a:solidFill><a:srgbClr val="${fill}"/></a:solidFill><a:ln w="12700"><a:solidFill><a:srgbClr val="${STROKE_COLOR}"/></a:solidFill></a:ln></p:spPr>
  ${txBody(paragraphs, options.anchor ?? "t")}
</p:sp>`;
}

export function pictureXml(options: {
  id: number;
  name: string;
  descr: string;
  title?: string;
  relId: string;
  rect: EmuRect;
}): string {
  const { id, name, descr, relId, rect } = options;
  const title = options.title ? ` title="${escapeXml(options.title)}"` : "";
  return `<p:pic>
  <p:nvPicPr><p:cNvPr id="${id}" name="${escapeXml(name)}" descr="${escapeXml(descr)}"${title}/><p:cNvPicPr><a:picLocks noChangeAspect="1"/></p:cNvPicPr><p:nvPr/></p:nvPicPr>
  <p:blipFill><a:blip r:embed="${relId}"/><a:stretch><a:fillRect/></a:stretch></p:blipFill>
  <p:spPr>${xfrm(rect)}<a:prstGeom prst="rect"><a:avLst/></a:prstGeom></p:spPr>
</p:pic>`;
}

/** Connection-site indices for rect-like presets: 0 top, 1 left, 2 bottom, 3 right. */
export type CxnSide = 0 | 1 | 2 | 3;

export function connectorXml(options: {
  id: number;
  name: string;
  descr: string;
  preset: "straightConnector1" | "bentConnector3";
  rect: EmuRect;
  flipH: boolean;
  flipV: boolean;
  startShapeId: number;
  startSide: CxnSide;
  endShapeId: number;
  endSide: CxnSide;
}): string {
  const o = options;
  return `<p:cxnSp>
  <p:nvCxnSpPr><p:cNvPr id="${o.id}" name="${escapeXml(o.name)}" descr="${escapeXml(o.descr)}"/><p:cNvCxnSpPr><a:stCxn id="${o.startShapeId}" idx="${o.startSide}"/><a:endCxn id="${o.endShapeId}" idx="${o.endSide}"/></p:cNvCxnSpPr><p:nvPr/></p:nvCxnSpPr>
  <p:spPr>${xfrm(o.rect, o.flipH, o.flipV)}<a:prstGeom prst="${o.preset}"><a:avLst/></a:prstGeom><a:ln w="19050"><a:solidFill><a:srgbClr val="${STROKE_COLOR}"/></a:solidFill><a:tailEnd type="triangle"/></a:ln></p:spPr>
</p:cxnSp>`;
}

export function slideXml(shapeFragments: string[]): string {
  return (
    XML_DECL +
    `<p:sld xmlns:a="${NS.a}" xmlns:r="${NS.r}" xmlns:p="${NS.p}">
  <p:cSld>
    <p:spTree>
      <p:nvGrpSpPr><p:cNvPr id="1" name=""/><p:cNvGrpSpPr/><p:nvPr/></p:nvGrpSpPr>
      <p:grpSpPr/>
${shapeFragments.join("\n")}
    </p:spTree>
  </p:cSld>
  <p:clrMapOvr><a:masterClrMapping/></p:clrMapOvr>
</p:sld>
`
  );
}

export function slideRelsXml(imageRels: { relId: string; target: string }[]): string {
  const rels = [
    `  <Relationship Id="rId1" Type="${REL_TYPES.slideLayout}" Target="../slideLayouts/slideLayout1.xml"/>`,
    ...imageRels.map(
      (rel) =>
        `  <Relationship Id="${rel.relId}" Type="${REL_TYPES.image}" Target="${rel.target}"/>`,
    ),
  ];
  return XML_DECL + `<Relationships xmlns="${NS.rel}">\n${rels.join("\n")}\n</Relationships>\n`;
}
